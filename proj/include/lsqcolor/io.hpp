#pragma once

// File formats used by the command-line front end.
//
// Dataset CSV: header "t,value"; one sample per row; value is a real number
// or a complex literal such as "1.5-2e-3j". Times must be integer multiples
// of a constant step.
//
// Noise spec JSON:
//   {"type": "white", "sigma": 1.0}            or {"type": "white", "level": S}
//   {"type": "power_law", "amplitude": A, "exponent": a, "f_min": f}   (f_min optional)
//   {"type": "tabulated", "points": [[f_hz, S], ...]}
//
// Model spec JSON:
//   {"dt": 1.0, "n": 64, "x_true": [1, [0.5, 0.1]],
//    "basis": [{"type": "constant"}, {"type": "polynomial", "degree": 1},
//              {"type": "sinusoid", "frequency": 0.05, "phase": 0},
//              {"type": "complex_exponential", "frequency": 0.1},
//              {"type": "tabulated", "samples": [...]}]}
//
// Perturbation spec JSON (PSD misspecification w):
//   {"type": "proportional", "scale": 1.0}         w = scale * S
//   {"type": "cosine", "cycles": 3, "scale": 1.0}  w = scale * S * cos(2 pi cycles f dt)
//   {"type": "tabulated", "points": [[f_hz, w], ...]}

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lsqcolor/noise.hpp"

namespace lsqcolor {

std::optional<cplx> parse_complex(std::string_view text);
std::string format_complex(cplx v);

SampledSignal read_dataset_csv(std::istream& in, const std::string& source = "<input>");
void write_dataset_csv(std::ostream& out, const SampledSignal& m);

/// Reads a file, or returns the argument itself when it is inline JSON.
std::string load_text(const std::string& path_or_inline);

/// Power-law specs without f_min get 1 / (10 n dt).
PsdSpec parse_noise_spec(std::string_view json_text, double dt, std::size_t n);
std::string noise_spec_to_json(const PsdSpec& spec);

struct ModelSpec {
  std::vector<BasisSpec> basis;
  std::vector<cplx> x_true;
  std::optional<double> dt;
  std::optional<std::size_t> n;
};

ModelSpec parse_model_spec(std::string_view json_text);

PsdFunction parse_perturbation(std::string_view json_text, const NoiseModel& model);

}  // namespace lsqcolor
