#pragma once

#include <string>
#include <vector>

#include "homog/config.hpp"

namespace homog {

struct ArtifactEntry {
  std::string name;
  std::string checksum;  // FNV-1a of the file bytes
};

struct CertEntry {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunManifest {
  std::string config_echo;
  std::vector<ArtifactEntry> artifacts;
  std::vector<CertEntry> certifications;
  double wall_seconds = 0.0;
  long solver_iterations = 0;
  bool all_passed = false;

  std::string text() const;
};

/// Execute the configured experiment, write its CSV artifacts into
/// config.out, then write manifest.txt last. Identical config and seed
/// reproduce identical bytes.
RunManifest run(const ExperimentConfig& config);

}  // namespace homog
