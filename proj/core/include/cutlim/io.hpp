#pragma once

#include <string>

#include "cutlim/cutnorm.hpp"
#include "cutlim/kernel.hpp"
#include "cutlim/law.hpp"
#include "cutlim/measure.hpp"

namespace cutlim {

// Canonical JSON serialisation. Configurations are ordered
// lexicographically (the in-memory order), floats carry 17 significant
// digits, and the byte stream is deterministic for equal inputs.
std::string to_json(const DiscreteMeasure& mu);
std::string to_json(const StepKernel& kappa);
std::string to_json(const Law& mu);

DiscreteMeasure measure_from_json(const std::string& text);
StepKernel kernel_from_json(const std::string& text);
Law law_from_json(const std::string& text);

enum class JsonKind { kMeasure, kKernel, kLaw };
JsonKind detect_json_kind(const std::string& text);

// Row-major CSV with an "m,n" header line.
std::string to_csv(const RealMatrix& a);
RealMatrix matrix_from_csv(const std::string& text);

// Binary 8-bit PGM heatmap of (s, x) -> kappa_{s,x}(symbol), row s from
// top to bottom; pixel = round-half-up of 255 * value.
std::string to_pgm(const StepKernel& kappa, int symbol, int width = 512, int height = 512);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Shared float formatting for every canonical writer.
std::string format_double(double v);

}  // namespace cutlim
