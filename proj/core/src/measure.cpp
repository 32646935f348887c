#include "cutlim/measure.hpp"

#include <cmath>
#include <limits>
#include <map>

namespace cutlim {

bool config_fits_u64(int q, int n) {
  if (q < 1 || n < 1) return false;
  unsigned long long acc = 1;
  for (int i = 0; i < n; ++i) {
    if (acc > (1ULL << 62) / static_cast<unsigned long long>(q)) return false;
    acc *= static_cast<unsigned long long>(q);
  }
  return true;
}

std::uint64_t pack_config(const Config& c, int q) {
  std::uint64_t key = 0;
  for (auto s : c) key = key * static_cast<std::uint64_t>(q) + s;
  return key;
}

Config unpack_config(std::uint64_t index, int q, int n) {
  Config c(static_cast<std::size_t>(n));
  for (int i = n - 1; i >= 0; --i) {
    c[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(index % static_cast<std::uint64_t>(q));
    index /= static_cast<std::uint64_t>(q);
  }
  return c;
}

namespace {

void check_same_shape(const DiscreteMeasure& a, const DiscreteMeasure& b, const char* op) {
  if (!(a.alphabet() == b.alphabet()) || a.dimension() != b.dimension()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
  }
}

// Projects each support entry onto the given coordinates and accumulates
// the weights into a map keyed by the projected configuration.
std::map<Config, double> project(const DiscreteMeasure& m, const std::vector<int>& block) {
  std::map<Config, double> out;
  Config key(block.size());
  for (const auto& [c, w] : m.support()) {
    for (std::size_t k = 0; k < block.size(); ++k) key[k] = c[static_cast<std::size_t>(block[k])];
    out[key] += w;
  }
  return out;
}

void check_block(const DiscreteMeasure& m, const std::vector<int>& block, const char* name) {
  std::vector<bool> seen(static_cast<std::size_t>(m.dimension()), false);
  for (int i : block) {
    if (i < 0 || i >= m.dimension()) throw std::out_of_range(std::string(name) + ": index out of range");
    if (seen[static_cast<std::size_t>(i)]) throw std::invalid_argument(std::string(name) + ": duplicate index");
    seen[static_cast<std::size_t>(i)] = true;
  }
}

void check_disjoint(const std::vector<int>& a, const std::vector<int>& b, const char* op) {
  for (int i : a) {
    for (int j : b) {
      if (i == j) throw std::invalid_argument(std::string(op) + ": blocks overlap");
    }
  }
}

}  // namespace

double tv_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  check_same_shape(mu, nu, "tv_distance");
  double sum = 0.0;
  auto a = mu.support();
  auto b = nu.support();
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      sum += std::abs(a[i].second);
      ++i;
    } else if (i == a.size() || b[j].first < a[i].first) {
      sum += std::abs(b[j].second);
      ++j;
    } else {
      sum += std::abs(a[i].second - b[j].second);
      ++i;
      ++j;
    }
  }
  return 0.5 * sum;
}

double kl_divergence(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  check_same_shape(mu, nu, "kl_divergence");
  double sum = 0.0;
  for (const auto& [c, p] : mu.support()) {
    const double q = nu.mass(c);
    if (q == 0.0) return std::numeric_limits<double>::infinity();
    sum += p * std::log(p / q);
  }
  return sum;
}

double entropy(const DiscreteMeasure& mu) {
  double h = 0.0;
  for (const auto& [c, p] : mu.support()) h -= p * std::log(p);
  return h;
}

double conditional_entropy(const DiscreteMeasure& joint, const std::vector<int>& block_a,
                           const std::vector<int>& block_b) {
  if (block_a.empty()) throw std::invalid_argument("conditional_entropy: empty A block");
  check_block(joint, block_a, "conditional_entropy");
  check_block(joint, block_b, "conditional_entropy");
  check_disjoint(block_a, block_b, "conditional_entropy");

  std::vector<int> ab = block_a;
  ab.insert(ab.end(), block_b.begin(), block_b.end());
  auto p_ab = project(joint, ab);
  auto p_b = project(joint, block_b);

  double h = 0.0;
  Config key_b(block_b.size());
  for (const auto& [key, pab] : p_ab) {
    if (pab <= 0.0) continue;
    std::copy(key.begin() + static_cast<std::ptrdiff_t>(block_a.size()), key.end(), key_b.begin());
    const double pb = block_b.empty() ? 1.0 : p_b.at(key_b);
    h -= pab * std::log(pab / pb);
  }
  return h;
}

double conditional_mutual_information(const DiscreteMeasure& joint, const std::vector<int>& block_x,
                                      const std::vector<int>& block_y, const std::vector<int>& block_z) {
  if (block_x.empty() || block_y.empty()) {
    throw std::invalid_argument("conditional_mutual_information: X and Y must be nonempty");
  }
  check_block(joint, block_x, "conditional_mutual_information");
  check_block(joint, block_y, "conditional_mutual_information");
  check_block(joint, block_z, "conditional_mutual_information");
  check_disjoint(block_x, block_y, "conditional_mutual_information");
  check_disjoint(block_x, block_z, "conditional_mutual_information");
  check_disjoint(block_y, block_z, "conditional_mutual_information");

  std::vector<int> xyz = block_x;
  xyz.insert(xyz.end(), block_y.begin(), block_y.end());
  xyz.insert(xyz.end(), block_z.begin(), block_z.end());
  std::vector<int> xz = block_x;
  xz.insert(xz.end(), block_z.begin(), block_z.end());
  std::vector<int> yz = block_y;
  yz.insert(yz.end(), block_z.begin(), block_z.end());

  auto p_xyz = project(joint, xyz);
  auto p_xz = project(joint, xz);
  auto p_yz = project(joint, yz);
  auto p_z = project(joint, block_z);

  const std::size_t nx = block_x.size(), ny = block_y.size(), nz = block_z.size();
  double info = 0.0;
  Config key_xz(nx + nz), key_yz(ny + nz), key_z(nz);
  for (const auto& [key, pxyz] : p_xyz) {
    if (pxyz <= 0.0) continue;
    std::copy(key.begin(), key.begin() + static_cast<std::ptrdiff_t>(nx), key_xz.begin());
    std::copy(key.begin() + static_cast<std::ptrdiff_t>(nx + ny), key.end(),
              key_xz.begin() + static_cast<std::ptrdiff_t>(nx));
    std::copy(key.begin() + static_cast<std::ptrdiff_t>(nx), key.end(), key_yz.begin());
    std::copy(key.begin() + static_cast<std::ptrdiff_t>(nx + ny), key.end(), key_z.begin());
    const double pz = nz == 0 ? 1.0 : p_z.at(key_z);
    info += pxyz * std::log(pxyz * pz / (p_xz.at(key_xz) * p_yz.at(key_yz)));
  }
  return info;
}

double symmetry_defect(const DiscreteMeasure& mu) {
  const int n = mu.dimension();
  if (n < 2) throw std::invalid_argument("symmetry_defect: dimension must be >= 2");
  const int q = mu.alphabet().size;
  const std::size_t qq = static_cast<std::size_t>(q) * static_cast<std::size_t>(q);

  // One pass accumulates every pair table and every single marginal.
  const std::size_t pairs = static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2;
  std::vector<double> pair_tables(pairs * qq, 0.0);
  std::vector<double> singles(static_cast<std::size_t>(n) * static_cast<std::size_t>(q), 0.0);
  for (const auto& [c, w] : mu.support()) {
    std::size_t t = 0;
    for (int i = 0; i < n; ++i) {
      singles[static_cast<std::size_t>(i) * q + c[static_cast<std::size_t>(i)]] += w;
      for (int j = i + 1; j < n; ++j, ++t) {
        pair_tables[t * qq + static_cast<std::size_t>(c[static_cast<std::size_t>(i)]) * q +
                    c[static_cast<std::size_t>(j)]] += w;
      }
    }
  }

  double defect = 0.0;
  std::size_t t = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++t) {
      double dist = 0.0;
      for (int a = 0; a < q; ++a) {
        for (int b = 0; b < q; ++b) {
          const double joint = pair_tables[t * qq + static_cast<std::size_t>(a) * q + b];
          const double prod = singles[static_cast<std::size_t>(i) * q + a] *
                              singles[static_cast<std::size_t>(j) * q + b];
          dist += std::abs(joint - prod);
        }
      }
      defect += 0.5 * dist;
    }
  }
  return defect;
}

DiscreteMeasure tensor_product(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (a.dimension() != b.dimension()) throw std::invalid_argument("tensor_product: dimension mismatch");
  const int n = a.dimension();
  const int qb = b.alphabet().size;
  Alphabet pair_alphabet{a.alphabet().size * qb};
  std::vector<DiscreteMeasure::Entry> entries;
  entries.reserve(a.support_size() * b.support_size());
  Config c(static_cast<std::size_t>(n));
  for (const auto& [sa, wa] : a.support()) {
    for (const auto& [sb, wb] : b.support()) {
      for (int i = 0; i < n; ++i) {
        c[static_cast<std::size_t>(i)] =
            static_cast<std::uint8_t>(sa[static_cast<std::size_t>(i)] * qb + sb[static_cast<std::size_t>(i)]);
      }
      entries.emplace_back(c, wa * wb);
    }
  }
  return DiscreteMeasure(pair_alphabet, n, std::move(entries));
}

DiscreteMeasure oplus_product(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  const int na = a.dimension();
  const int nb = b.dimension();
  const int qb = b.alphabet().size;
  Alphabet pair_alphabet{a.alphabet().size * qb};
  std::vector<DiscreteMeasure::Entry> entries;
  entries.reserve(a.support_size() * b.support_size());
  Config c(static_cast<std::size_t>(na) * static_cast<std::size_t>(nb));
  for (const auto& [sa, wa] : a.support()) {
    for (const auto& [sb, wb] : b.support()) {
      for (int i = 0; i < na; ++i) {
        for (int j = 0; j < nb; ++j) {
          c[static_cast<std::size_t>(i) * nb + j] =
              static_cast<std::uint8_t>(sa[static_cast<std::size_t>(i)] * qb + sb[static_cast<std::size_t>(j)]);
        }
      }
      entries.emplace_back(c, wa * wb);
    }
  }
  return DiscreteMeasure(pair_alphabet, na * nb, std::move(entries));
}

}  // namespace cutlim
