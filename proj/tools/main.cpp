// Command-line driver: model generation, distances, pinning and sampling
// experiments, weak regularity, overlaps and heatmap export. All
// structured output is JSON with a reproducibility header (seed, version,
// full parameters); heatmaps are binary PGM. Exit codes: 0 success,
// 2 usage error, 3 size-bound refusal, 4 numeric failure.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cutlim/distance.hpp"
#include "cutlim/errors.hpp"
#include "cutlim/io.hpp"
#include "cutlim/law.hpp"
#include "cutlim/models.hpp"
#include "cutlim/pinning.hpp"
#include "cutlim/sampling.hpp"
#include "cutlim/version.hpp"

namespace {

using nlohmann::json;
using namespace cutlim;

struct GlobalFlags {
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out;
};

void emit(const GlobalFlags& g, json report) {
  report["version"] = kVersion;
  report["seed"] = g.seed;
  const std::string text = report.dump(2) + "\n";
  if (g.out.empty()) {
    std::cout << text;
  } else {
    write_text_file(g.out, text);
  }
}

void emit_raw(const GlobalFlags& g, const std::string& bytes) {
  if (g.out.empty()) {
    std::cout << bytes;
  } else {
    write_text_file(g.out, bytes);
  }
}

// Loaded input: a measure, kernel or law, with coercions between them.
struct LoadedObject {
  std::optional<DiscreteMeasure> measure;
  std::optional<StepKernel> kernel;
  std::optional<Law> law;
  bool coerced = false;

  StepKernel as_kernel() {
    if (kernel) return *kernel;
    coerced = true;
    if (law) return to_kernel(*law);
    return to_kernel(embed(*measure));
  }
  Law as_law() {
    if (law) return *law;
    coerced = true;
    if (kernel) return from_kernel(*kernel);
    return embed(*measure);
  }
};

LoadedObject load_object(const std::string& path) {
  LoadedObject obj;
  std::string text = read_text_file(path);
  if (path.size() > 4 && path.substr(path.size() - 4) == ".csv") {
    throw std::invalid_argument("CSV input is only valid for `dist --variant noperm`");
  }
  // Accept report files by unwrapping their embedded object.
  json parsed = json::parse(text);
  for (const char* wrapper : {"object", "pinned"}) {
    if (parsed.is_object() && parsed.contains(wrapper)) {
      text = parsed[wrapper].dump();
      break;
    }
  }
  switch (detect_json_kind(text)) {
    case JsonKind::kMeasure: obj.measure = measure_from_json(text); break;
    case JsonKind::kKernel: obj.kernel = kernel_from_json(text); break;
    case JsonKind::kLaw: obj.law = law_from_json(text); break;
  }
  return obj;
}

bool is_csv(const std::string& path) {
  return path.size() > 4 && path.substr(path.size() - 4) == ".csv";
}

json witness_json(const CutWitness& w) {
  json j;
  j["S"] = w.row_set;
  j["X"] = w.col_set;
  if (w.symbol >= 0) j["omega"] = w.symbol;
  j["value"] = w.value;
  return j;
}

int run_model(const GlobalFlags& g, const std::string& name, int n, const std::string& parity,
              double temperature, int grid) {
  json params{{"model", name}, {"n", n}, {"parity", parity}, {"T", temperature}, {"grid", grid}};
  std::string payload;
  if (name == "parity") {
    if (n < 1) throw CLI::ValidationError("--n must be >= 1");
    payload = to_json(parity_measure(n, parity == "odd" ? ParityClass::kOdd : ParityClass::kEven));
  } else if (name == "iscaled") {
    payload = to_json(iscaled_measure(n));
  } else if (name == "curie-weiss") {
    payload = to_json(curie_weiss_measure({n, temperature}));
  } else if (name == "iscaled-limit") {
    payload = to_json(iscaled_limit_kernel(grid));
  } else if (name == "cw-limit") {
    payload = to_json(curie_weiss_limit_kernel(temperature));
  } else {
    throw CLI::ValidationError("unknown model: " + name);
  }
  json report{{"command", "model"}, {"params", params}};
  if (g.out.empty()) {
    report["object"] = json::parse(payload);
    emit(g, report);
  } else {
    // The file gets the bare canonical object so it feeds the other
    // subcommands; the reproducibility header goes to stdout.
    write_text_file(g.out, payload + "\n");
    report["file"] = g.out;
    GlobalFlags stdout_only = g;
    stdout_only.out.clear();
    emit(stdout_only, report);
  }
  return 0;
}

int run_dist(const GlobalFlags& g, const std::string& path_a, const std::string& path_b,
             const std::string& variant, const std::string& mode) {
  json report{{"command", "dist"},
              {"params", {{"a", path_a}, {"b", path_b}, {"variant", variant}, {"mode", mode}}}};

  if (is_csv(path_a) || is_csv(path_b)) {
    if (variant != "noperm") throw CLI::ValidationError("CSV matrices support --variant noperm only");
    RealMatrix a = matrix_from_csv(read_text_file(path_a));
    RealMatrix b = matrix_from_csv(read_text_file(path_b));
    if (a.rows != b.rows || a.cols != b.cols) throw CLI::ValidationError("matrix shapes differ");
    for (std::size_t t = 0; t < a.values.size(); ++t) a.values[t] -= b.values[t];
    CutNormResult r = std::min(a.rows, a.cols) <= kMaxExactCutAxis ? cut_norm_exact(a)
                                                                   : cut_norm_alternating(a, 64, g.seed);
    report["value"] = r.value;
    report["mode"] = r.exact ? "exact" : "lower";
    report["witness"] = witness_json(r.witness);
    report["iterations"] = 0;
    emit(g, report);
    return 0;
  }

  LoadedObject a = load_object(path_a);
  LoadedObject b = load_object(path_b);
  const bool discrete_pair = a.measure && b.measure;

  if (discrete_pair && (variant == "weak" || variant == "strong")) {
    DiscreteDistanceOptions opts;
    opts.variant = variant == "weak" ? DiscreteVariant::kWeak : DiscreteVariant::kStrong;
    opts.mode = mode == "upper" ? DiscreteMode::kUpper : DiscreteMode::kExact;
    DiscreteDistanceResult r = discrete_cut_distance(*a.measure, *b.measure, opts);
    report[r.kind == BoundKind::kExact ? "value" : "upper"] = r.value;
    report["mode"] = mode.empty() ? "exact" : mode;
    report["witness"] = witness_json(r.witness);
    report["coupling_nnz"] = r.coupling_nnz;
    report["iterations"] = r.iterations;
    emit(g, report);
    return 0;
  }

  StepKernel ka = a.as_kernel();
  StepKernel kb = b.as_kernel();
  report["coerced"] = a.coerced || b.coerced;
  if (variant == "noperm") {
    KernelDistanceResult r = kernel_distance_noperm(ka, kb);
    report["value"] = r.upper;
    report["mode"] = "noperm";
    report["witness"] = witness_json(r.witness);
    if (r.bipartite_value) report["bipartite_value"] = *r.bipartite_value;
    report["iterations"] = r.iterations;
  } else {
    KernelDistanceOptions opts;
    opts.family = variant == "strong" ? TransformFamily::kRowsOnly : TransformFamily::kRowsAndCols;
    opts.seed = g.seed;
    if (mode == "exact-tiny") {
      opts.mode = KernelDistanceMode::kExactTiny;
    } else if (mode == "sampled") {
      opts.mode = KernelDistanceMode::kSampled;
    } else {
      opts.mode = KernelDistanceMode::kTransport;
    }
    KernelDistanceResult r = kernel_distance(ka, kb, opts);
    report["upper"] = r.upper;
    report["lower"] = r.lower;
    if (r.estimate) {
      report["estimate"] = *r.estimate;
      report["std_error"] = r.std_error;
    }
    if (r.graphon_value) report["graphon_value"] = *r.graphon_value;
    report["mode"] = r.mode;
    report["witness"] = witness_json(r.witness);
    report["iterations"] = r.iterations;
  }
  emit(g, report);
  return 0;
}

int run_pin(const GlobalFlags& g, const std::string& path, int theta) {
  LoadedObject obj = load_object(path);
  json report{{"command", "pin"}, {"params", {{"input", path}, {"theta", theta}}}};
  if (obj.measure) {
    DiscretePinResult r = pin_discrete(*obj.measure, theta, g.seed);
    report["pinned"] = json::parse(to_json(r.measure));
    report["coordinates"] = r.spec.coordinates;
    report["reference"] = r.spec.reference;
  } else {
    LawPinResult r = pin_law_random(obj.as_law(), theta, g.seed);
    report["pinned"] = json::parse(to_json(r.law));
    report["cells"] = r.spec.coordinates;
    report["reference"] = r.spec.reference;
    report["z"] = r.z;
  }
  emit(g, report);
  return 0;
}

int run_pin_experiment(const GlobalFlags& g, const std::string& path, double eps, int trials,
                       int theta_cap) {
  LoadedObject obj = load_object(path);
  PinningExperimentOptions opts;
  opts.theta_cap = theta_cap;
  opts.threads = g.threads;
  PinningExperimentReport r = pinning_theorem_experiment(obj.as_law(), eps, trials, g.seed, opts);
  json report{{"command", "pin-experiment"},
              {"params", {{"input", path}, {"epsilon", eps}, {"trials", trials}, {"theta_cap", theta_cap}}},
              {"epsilon", r.epsilon},
              {"theta_cap", r.theta_cap_used},
              {"theta_cap_theorem", r.theta_cap_theorem},
              {"p_extremal_lower", r.p_extremal_lower},
              {"e_dist_upper", r.e_dist_upper},
              {"trials", r.trials}};
  emit(g, report);
  return 0;
}

int run_sample(const GlobalFlags& g, const std::string& path, int n, int trials,
               const std::string& batch_out, const std::string& prefix_csv) {
  LoadedObject obj = load_object(path);
  StepKernel kernel = obj.as_kernel();
  json report{{"command", "sample"},
              {"params", {{"input", path}, {"n", n}, {"trials", trials}}}};

  if (!batch_out.empty() || !prefix_csv.empty()) {
    SampleBatch batch = sample_matrix(kernel, n, g.seed);
    if (!batch_out.empty()) {
      json b{{"n", batch.n},
             {"seed", batch.seed},
             {"row_coords", batch.row_coords},
             {"col_coords", batch.col_coords},
             {"minor", json::parse(to_json(batch.minor))},
             {"symbols", batch.symbols}};
      write_text_file(batch_out, b.dump(2) + "\n");
    }
    if (!prefix_csv.empty()) {
      std::string csv;
      for (int i = 0; i < batch.n; ++i) {
        for (int j = 0; j < batch.n; ++j) {
          if (j) csv += ',';
          csv += std::to_string(static_cast<int>(batch.symbol(i, j)));
        }
        csv += '\n';
      }
      write_text_file(prefix_csv, csv);
    }
    report["batch_file"] = batch_out;
    report["prefix_csv"] = prefix_csv;
  }

  std::vector<int> sizes;
  for (int m = 8; m <= n; m *= 2) sizes.push_back(m);
  if (sizes.empty() || sizes.back() != n) sizes.push_back(n);
  auto rows = sampling_convergence_experiment(kernel, sizes, trials, g.seed, g.threads);
  json table = json::array();
  for (const auto& row : rows) {
    table.push_back({{"n", row.n}, {"mean", row.mean}, {"std_error", row.std_error}});
  }
  report["distance_table"] = table;
  emit(g, report);
  return 0;
}

int run_regularity(const GlobalFlags& g, const std::string& path, double eps, int max_iters,
                   const std::string& partition_out) {
  LoadedObject obj = load_object(path);
  StepKernel kernel = obj.as_kernel();
  WeakRegularityResult r = weak_regularity(kernel, eps, max_iters);
  json report{{"command", "regularity"},
              {"params", {{"input", path}, {"epsilon", eps}, {"max_iters", max_iters}}},
              {"residual", r.residual},
              {"iterations", r.iterations},
              {"certified", r.certified},
              {"reached_target", r.reached_target},
              {"row_classes", r.rows.classes},
              {"col_classes", r.cols.classes}};
  json partition{{"rows", {{"assignment", r.rows.assignment}, {"weights", r.rows.weights}}},
                 {"cols", {{"assignment", r.cols.assignment}, {"weights", r.cols.weights}}}};
  if (partition_out.empty()) {
    report["partition"] = partition;
  } else {
    write_text_file(partition_out, partition.dump(2) + "\n");
    report["partition_file"] = partition_out;
  }
  emit(g, report);
  return 0;
}

int run_overlap(const GlobalFlags& g, const std::string& path, int ell,
                const std::vector<int>& omegas) {
  LoadedObject obj = load_object(path);
  OverlapOptions opts;
  opts.seed = g.seed;
  OverlapResult r = multi_overlap(obj.as_law(), ell, omegas, opts);
  json report{{"command", "overlap"},
              {"params", {{"input", path}, {"l", ell}, {"omegas", omegas}}},
              {"value", r.value},
              {"exact", r.exact}};
  if (!r.exact) report["std_error"] = r.std_error;
  emit(g, report);
  return 0;
}

int run_heatmap(const GlobalFlags& g, const std::string& path, int symbol, int size) {
  LoadedObject obj = load_object(path);
  if (g.out.empty()) throw CLI::ValidationError("heatmap requires --out FILE.pgm");
  emit_raw(g, to_pgm(obj.as_kernel(), symbol, size, size));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cut-metric toolkit for distributions on discrete cubes"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  GlobalFlags g;
  app.add_option("--seed", g.seed, "master seed echoed in every output");
  app.add_option("--threads", g.threads, "worker cap for parallel experiments");
  app.add_option("--out", g.out, "output path (stdout when omitted)");

  std::string model_name = "parity", parity = "even";
  int n = 4, grid = 64;
  double temperature = 1.0;
  auto* model = app.add_subcommand("model", "emit a built-in model as measure/kernel JSON");
  model->add_option("name", model_name, "parity|iscaled|curie-weiss|iscaled-limit|cw-limit")->required();
  model->add_option("--n", n, "dimension");
  model->add_option("--parity", parity, "even|odd");
  model->add_option("--T", temperature, "temperature");
  model->add_option("--grid", grid, "discretisation grid");

  std::string path_a, path_b, variant = "weak", mode;
  auto* dist = app.add_subcommand("dist", "cut distance between two objects");
  dist->add_option("a", path_a)->required();
  dist->add_option("b", path_b)->required();
  dist->add_option("--variant", variant, "weak|strong|kernel|noperm");
  dist->add_option("--mode", mode, "exact|upper|exact-tiny|transport|sampled");

  std::string input;
  int theta = 1;
  auto* pin = app.add_subcommand("pin", "pin random coordinates of a measure or law");
  pin->add_option("input", input)->required();
  pin->add_option("--theta", theta, "number of pinned coordinates");

  double eps = 0.3;
  int trials = 50, theta_cap = 12;
  auto* pinx = app.add_subcommand("pin-experiment", "pinning theorem experiment");
  pinx->add_option("input", input)->required();
  pinx->add_option("--epsilon", eps);
  pinx->add_option("--trials", trials);
  pinx->add_option("--theta-cap", theta_cap);

  int sample_n = 32;
  std::string batch_out, prefix_csv;
  auto* sample = app.add_subcommand("sample", "sampling convergence experiment and batch export");
  sample->add_option("input", input)->required();
  sample->add_option("--n", sample_n);
  sample->add_option("--trials", trials);
  sample->add_option("--export-batch", batch_out, "write the n-sample batch as JSON");
  sample->add_option("--prefix-csv", prefix_csv, "write the symbol array prefix as CSV");

  int max_iters = 64;
  std::string partition_out;
  auto* reg = app.add_subcommand("regularity", "weak regularity partition");
  reg->add_option("input", input)->required();
  reg->add_option("--epsilon", eps);
  reg->add_option("--max-iters", max_iters);
  reg->add_option("--partition-out", partition_out);

  int ell = 1;
  std::vector<int> omegas{1};
  auto* overlap = app.add_subcommand("overlap", "multi-overlap of a law");
  overlap->add_option("input", input)->required();
  overlap->add_option("--l", ell);
  overlap->add_option("--omegas", omegas)->delimiter(',');

  int symbol = 1, size = 512;
  auto* heatmap = app.add_subcommand("heatmap", "PGM heatmap of a kernel slice");
  heatmap->add_option("input", input)->required();
  heatmap->add_option("--omega", symbol);
  heatmap->add_option("--size", size);

  try {
    app.parse(argc, argv);
    if (model->parsed()) return run_model(g, model_name, n, parity, temperature, grid);
    if (dist->parsed()) return run_dist(g, path_a, path_b, variant, mode);
    if (pin->parsed()) return run_pin(g, input, theta);
    if (pinx->parsed()) return run_pin_experiment(g, input, eps, trials, theta_cap);
    if (sample->parsed()) return run_sample(g, input, sample_n, trials, batch_out, prefix_csv);
    if (reg->parsed()) return run_regularity(g, input, eps, max_iters, partition_out);
    if (overlap->parsed()) return run_overlap(g, input, ell, omegas);
    if (heatmap->parsed()) return run_heatmap(g, input, symbol, size);
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const cutlim::SizeLimitError& e) {
    std::cerr << "size bound: " << e.what() << "\n";
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "usage error: malformed input: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
