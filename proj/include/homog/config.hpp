#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "homog/coefficients.hpp"

namespace homog {

enum class Command { Correctors, Growth, Excess, ThmT, CorC, LemmaL };

const char* to_string(Command c);

/// Flat key=value experiment description; every field is validated before
/// any solve starts.
struct ExperimentConfig {
  Command command = Command::Correctors;
  int dim = 2;
  int size = 64;
  EnsembleSpec ensemble;
  std::uint64_t seed = 0;
  double tol = 1e-10;
  int max_iter = 400000;
  std::string out = ".";
  int threads = 1;

  std::vector<double> x0;     // offsets along e1 (thmT, corC)
  std::vector<double> radii;  // growth / excess / invariants radii
  int R = 16;                 // excess ball, lemma L half-box scale
  int N = 8;                  // lemma L ensemble size
  int M = 8;                  // lemma L dictionary size
  int samples = 8;            // excess sample count
  int box = 0;                // Dirichlet box side override (0 = auto)
  std::array<int, 3> center{0, 0, 0};  // growth center
};

/// Parse line-oriented "key = value" text with '#' comments. Duplicate keys
/// and malformed lines raise PARSE_ERROR with the offending line number;
/// out-of-range values raise VALIDATION_ERROR naming the field.
ExperimentConfig parse_config(const std::string& text);

/// Canonical echo of the config, one key=value per line, fixed key order.
std::string echo_config(const ExperimentConfig& config);

}  // namespace homog
