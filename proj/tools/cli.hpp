#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fnf/data/csv.hpp"
#include "fnf/data/loaders.hpp"
#include "fnf/io/model_io.hpp"

namespace fnf::cli {

namespace fs = std::filesystem;
using io::Json;

// One invocation of a subcommand. Outputs are recorded relative to `out`
// and listed in the run manifest written by finish().
class Run {
 public:
  Run(std::string command, std::vector<std::string> argv, fs::path out, std::string manifest_stem, bool force);

  Json config = Json::object();
  std::uint64_t seed = 0;

  const fs::path& out() const { return out_; }
  std::string manifest_name() const { return stem_ + ".manifest.json"; }

  void input(const fs::path& path);
  // Records a file under out() written by other code.
  void output(const fs::path& relative) { outputs_.push_back(relative.generic_string()); }
  void cache_outputs(const std::string& dataset);
  // Adds a "manifest" field naming this run's manifest.
  void write_json(const fs::path& relative, Json doc);
  void write_csv(const fs::path& relative, const data::CsvTable& table);
  void finish();

 private:
  std::string command_;
  std::vector<std::string> argv_;
  fs::path out_;
  std::string stem_;
  std::vector<std::pair<std::string, std::string>> inputs_;  // path, hash
  std::vector<std::string> outputs_;
  std::chrono::steady_clock::time_point start_;
};

// FNV-1a over the file bytes, as 16 hex digits.
std::string file_hash(const fs::path& path);

std::string format_number(double v);
std::vector<double> parse_number_list(const std::string& s);
std::vector<int> parse_int_list(const std::string& s);
// "2x50" -> {50, 50}
std::vector<int> parse_architecture(const std::string& s);

// Null when unset.
Json optional_number(const std::optional<double>& v);

data::DatasetSplits load_cached(const fs::path& cache, const std::string& dataset);

// Command table entry: registers options on a subcommand and returns the
// action to run after parsing.
using Action = std::function<void(const std::vector<std::string>& argv)>;
using Registrar = std::function<Action(CLI::App& sub)>;

Action add_synth(CLI::App& sub);
Action add_prepare(CLI::App& sub);
Action add_sanity(CLI::App& sub);
Action add_fit_density(CLI::App& sub);
Action add_train(CLI::App& sub);
Action add_certify(CLI::App& sub);
Action add_attack(CLI::App& sub);
Action add_eval(CLI::App& sub);
Action add_match_discrete(CLI::App& sub);
Action add_recourse(CLI::App& sub);

// Parses and runs argv; returns the process exit code.
int run_cli(const std::vector<std::string>& argv);

}  // namespace fnf::cli
