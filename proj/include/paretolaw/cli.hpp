#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "paretolaw/audit.hpp"
#include "paretolaw/dgp.hpp"
#include "paretolaw/fitting.hpp"
#include "paretolaw/training.hpp"

namespace paretolaw {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;      // operation error or failed verification
inline constexpr int kExitUsage = 2;        // bad flags or configuration
inline constexpr int kExitStaleInput = 3;   // digest mismatch / missing upstream artifact

struct FitSelection {
  std::vector<std::int64_t> only_n;
  std::vector<std::int64_t> only_d;
};

/// Everything a pipeline run can be configured with. Paths are absolute
/// after loading (resolved against the config file's directory).
struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = ".";

  DgpConfig dgp;
  std::optional<std::filesystem::path> external_data;

  SweepConfig sweep;
  int lambda_count = 100;  // used when sweep.lambda_grid is empty
  bool keep_checkpoints = false;

  bool average_seeds = false;

  FitProblem fit;
  FitSelection fit_selection;

  double n_plus = 0.0;
  double d_plus = 0.0;
  int grid_points = 512;

  ContestedModel contested{0.0, 0.0, 0, 0, {}};  // n_plus, d_plus must be set before auditing
};

/// Parses a JSON configuration document. Unknown keys raise ConfigError.
/// `base` is the directory relative paths are resolved against.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base);
RunConfig load_run_config(const std::filesystem::path& path);

/// Provenance sidecar written next to every artifact as `<file>.meta.json`.
struct ArtifactMeta {
  std::string kind;
  std::string digest;  // SHA-256 of the artifact bytes
  std::map<std::string, std::string> inputs;  // input name -> digest
  std::map<std::string, std::string> params;
};

std::filesystem::path meta_path(const std::filesystem::path& artifact);
std::string meta_text(const ArtifactMeta& meta);
ArtifactMeta parse_meta(const std::string& text);

/// Writes the artifact and its sidecar; returns the artifact digest.
std::string write_artifact(const std::filesystem::path& path, const std::string& bytes, const std::string& kind,
                           const std::map<std::string, std::string>& inputs = {},
                           const std::map<std::string, std::string>& params = {});

/// Reads an artifact and checks it against its sidecar. Throws
/// DigestMismatch when the bytes changed (unless `force`), ConfigError when
/// the file or sidecar is missing.
ArtifactMeta check_artifact(const std::filesystem::path& path, const std::string& expected_kind, bool force);

/// Runs one command line (without the program name). Output goes to the
/// given streams; the return value is the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace paretolaw
