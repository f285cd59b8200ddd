#pragma once

#include "nswx/analysis.hpp"
#include "nswx/core.hpp"
#include "nswx/rounding.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace nswx::cli {

/// Malformed instance file; the message carries line or field context.
class InstanceFormatError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

struct InstanceFile {
  std::string schema_version = "1.0";
  std::vector<std::string> agent_ids;
  std::vector<double> weights;  // as written, not normalized
  std::vector<std::string> item_ids;
  Matrix valuations;

  Instance to_instance() const;
};

/// Parses the JSON instance schema (dense or sparse valuations).
InstanceFile parse_instance_file(const std::string& text);
InstanceFile read_instance_file(const std::string& path);

/// Dense JSON with 17 significant digits.
std::string dump_instance_file(const InstanceFile& file);

struct LoadedInstance {
  InstanceFile file;
  Instance instance;
  std::vector<std::string> warnings;
};

LoadedInstance load_instance(const std::string& path);

struct GenParams {
  std::string weights = "dirichlet";  // or "equal"; ignored by kind "skewed"
};

/// Kinds: uniform, skewed, diagonal, adversarial-light. Deterministic per seed.
InstanceFile gen_instance(const std::string& kind, int n, int m, std::uint64_t seed, const GenParams& params = {});

/// JSON text with every double printed as %.17g; non-finite values become
/// the strings "inf", "-inf" or "nan".
std::string to_json_text(const nlohmann::json& value, int indent = 2);

struct Options {
  std::string path;        // instance file, or directory for bench
  double tol = 1e-6;
  int max_iters = 50000;
  std::uint64_t seed = 0;
  std::string out;         // empty: stdout
  std::string format = "json";
  bool with_oracle = false;
  std::uint64_t cap = kDefaultOracleCap;
  bool no_timing = false;  // bench: omit wall-clock column values
  // gen
  std::string kind = "uniform";
  int n = 3;
  int m = 6;
  std::string weights = "dirichlet";
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitUncertified = 2;
inline constexpr int kExitCheckFailed = 3;

int cmd_solve(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_verify(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_oracle(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_gen(const Options& opt, std::ostream& out, std::ostream& err);
int cmd_bench(const Options& opt, std::ostream& out, std::ostream& err);

/// Worker count for bench: NSWX_THREADS if set and positive, else hardware concurrency.
int bench_threads();

}  // namespace nswx::cli
