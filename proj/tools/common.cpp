#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "cli.hpp"
#include "fnf/data/cache.hpp"
#include "fnf/errors.hpp"

#ifndef FNF_VERSION
#define FNF_VERSION "unknown"
#endif

namespace fnf::cli {

Run::Run(std::string command, std::vector<std::string> argv, fs::path out, std::string manifest_stem, bool force)
    : command_(std::move(command)),
      argv_(std::move(argv)),
      out_(std::move(out)),
      stem_(std::move(manifest_stem)),
      start_(std::chrono::steady_clock::now()) {
  // Manifests are never rewritten in place.
  if (fs::exists(out_ / manifest_name()) && !force) {
    throw UsageError((out_ / manifest_name()).string() + " exists; choose another --out or pass --force");
  }
  fs::create_directories(out_);
}

void Run::input(const fs::path& path) { inputs_.emplace_back(path.string(), file_hash(path)); }

void Run::cache_outputs(const std::string& dataset) {
  for (const char* split : {"train", "val", "test"}) output(dataset + "." + split + ".csv");
  output(dataset + ".schema.json");
}

void Run::write_json(const fs::path& relative, Json doc) {
  doc["manifest"] = manifest_name();
  io::write_json(out_ / relative, doc);
  outputs_.push_back(relative.generic_string());
}

void Run::write_csv(const fs::path& relative, const data::CsvTable& table) {
  if (!relative.parent_path().empty()) fs::create_directories(out_ / relative.parent_path());
  data::write_csv(out_ / relative, table);
  outputs_.push_back(relative.generic_string());
}

void Run::finish() {
  Json inputs = Json::array();
  for (const auto& [path, hash] : inputs_) inputs.push_back({{"path", path}, {"fnv1a64", hash}});
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  const Json manifest = {{"format_version", io::kModelFormatVersion},
                         {"tag", "run_manifest"},
                         {"command", command_},
                         {"argv", argv_},
                         {"config", config},
                         {"seed", seed},
                         {"version", FNF_VERSION},
                         {"inputs", inputs},
                         {"outputs", outputs_},
                         {"wall_time_seconds", wall}};
  io::write_json(out_ / manifest_name(), manifest);
}

std::string file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingInputError("cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::vector<double> parse_number_list(const std::string& s) {
  std::vector<double> out;
  for (const std::string& field : data::split_csv_line(s)) {
    double v = 0;
    const auto r = std::from_chars(field.data(), field.data() + field.size(), v);
    if (r.ec != std::errc() || r.ptr != field.data() + field.size()) throw UsageError("not a number: '" + field + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  if (s.empty()) return out;
  for (const std::string& field : data::split_csv_line(s)) {
    int v = 0;
    const auto r = std::from_chars(field.data(), field.data() + field.size(), v);
    if (r.ec != std::errc() || r.ptr != field.data() + field.size()) throw UsageError("not an integer: '" + field + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<int> parse_architecture(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw UsageError("architecture must look like 2x50, got '" + s + "'");
  const std::vector<int> parts = parse_int_list(s.substr(0, x) + "," + s.substr(x + 1));
  if (parts[0] < 1 || parts[1] < 1) throw UsageError("architecture must be positive: '" + s + "'");
  return std::vector<int>(static_cast<std::size_t>(parts[0]), parts[1]);
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

data::DatasetSplits load_cached(const fs::path& cache, const std::string& dataset) {
  return data::load_cache(cache, dataset);
}

int run_cli(const std::vector<std::string>& argv) {
  CLI::App app{"Fair normalizing flows: train, certify and evaluate fair representations", "fnf"};
  app.require_subcommand(1);
  app.set_version_flag("--version", FNF_VERSION);

  const std::vector<std::pair<const char*, std::pair<const char*, Registrar>>> table = {
      {"synth", {"Write the synthetic two-mixture dataset; with --runs, the recovery histogram", add_synth}},
      {"prepare", {"Load a raw dataset, split it and write the dataset cache", add_prepare}},
      {"sanity", {"Compare an MLP on the original and preprocessed variants", add_sanity}},
      {"fit-density", {"Fit one base density per sensitive group", add_fit_density}},
      {"train", {"Train flow encoders and a classifier (gamma sweep supported)", add_train}},
      {"certify", {"Estimate the statistical distance and certify adversarial accuracy", add_certify}},
      {"attack", {"Train MLP adversaries on the frozen latents", add_attack}},
      {"eval", {"Accuracy and fairness metrics of trained checkpoints", add_eval}},
      {"match-discrete", {"Optimal discrete matching for a categorical dataset", add_match_discrete}},
      {"recourse", {"Recourse for rejected test rows through the flow", add_recourse}},
  };
  std::vector<std::pair<CLI::App*, Action>> actions;
  for (const auto& [name, entry] : table) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    actions.emplace_back(sub, entry.second(*sub));
  }
  CLI::App* rerun = app.add_subcommand("rerun", "Run the command recorded in a manifest again");
  std::string manifest_path, rerun_out;
  rerun->add_option("manifest", manifest_path, "Manifest file")->required();
  rerun->add_option("--out", rerun_out, "Replacement output directory")->required();

  std::vector<std::string> args(argv.begin() + 1, argv.end());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (rerun->parsed()) {
    const Json m = io::read_json(manifest_path);
    io::expect_tag(m, "run_manifest");
    std::vector<std::string> replay = m.at("argv").get<std::vector<std::string>>();
    bool replaced = false;
    for (std::size_t i = 0; i + 1 < replay.size(); ++i) {
      if (replay[i] == "--out") {
        replay[i + 1] = rerun_out;
        replaced = true;
      }
    }
    if (!replaced) {
      replay.push_back("--out");
      replay.push_back(rerun_out);
    }
    return run_cli(replay);
  }
  for (auto& [sub, action] : actions) {
    if (sub->parsed()) action(argv);
  }
  return 0;
}

}  // namespace fnf::cli
