// honeyfilter command-line front end; talks to the library only through the
// C API.
#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "honeyfilter/honeyfilter.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct Failure {
  std::string stage;
  hf_status status;
  std::string message;
};

void check(hf_status status, const std::string& stage) {
  if (status != HF_OK) throw Failure{stage, status, hf_last_error()};
}

std::string take(char* s) {
  std::string out = s ? s : "";
  hf_free_string(s);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{"config", HF_ERR_IO, "cannot open " + path};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::size_t> k;
  std::vector<std::size_t> attempts;
  std::string hgt;
  bool force = false;

  void add_to(CLI::App* cmd, bool config_required) {
    auto* opt = cmd->add_option("--config", config, "Run config (JSON)");
    if (config_required) opt->required();
    cmd->add_option("--seed", seed, "Master seed");
    cmd->add_option("--out", out, "Output directory");
    cmd->add_option("--k", k, "Sweetwords per account");
    cmd->add_option("--attempts", attempts, "Reported attempt counts")->delimiter(',');
    cmd->add_option("--hgt", hgt, "Honeyword generator")
        ->check(CLI::IsMember({"tweak", "model", "hybrid", "import"}));
    cmd->add_flag("--force", force, "Accept artifacts from a different config");
  }

  std::string options_json() const {
    nlohmann::json j = nlohmann::json::object();
    if (seed) j["seed"] = *seed;
    if (!out.empty()) j["output_dir"] = out;
    if (k) j["k"] = *k;
    if (!attempts.empty()) j["attempts"] = attempts;
    if (!hgt.empty()) j["hgt"] = hgt;
    if (force) j["force"] = true;
    return j.dump();
  }
};

int run_stage(const std::string& stage, const Common& common) {
  const std::string config = read_file(common.config);
  char* result = nullptr;
  check(hf_run_stage(stage.c_str(), config.c_str(), common.options_json().c_str(), &result),
        stage);
  const std::string text = take(result);
  if (stage == "eval" || stage == "run") {
    char* grid = nullptr;
    check(hf_format_grid(text.c_str(), &grid), stage);
    std::cout << take(grid);
  } else {
    std::cout << text << '\n';
  }
  return kExitOk;
}

struct GenArgs {
  std::string hgt = "tweak";
  std::size_t count = 19;
  std::uint64_t seed = 0;
  std::optional<double> p, q, f, g;
  std::string embedding;
  std::string table;
};

int gen_stdin(const GenArgs& a) {
  hf_tweak_params params;
  hf_tweak_params_default(&params);
  params.seed = a.seed;
  if (a.p) params.p = *a.p;
  if (a.q) params.q = *a.q;
  if (a.f) params.f = *a.f;
  if (a.g) params.g = *a.g;

  hf_embedding* emb = nullptr;
  hf_generator* gen = nullptr;
  if (a.hgt == "model" || a.hgt == "hybrid") {
    if (a.embedding.empty()) throw Failure{"gen", HF_ERR_INVALID_ARGUMENT, "--embedding required"};
    check(hf_embedding_load(a.embedding.c_str(), &emb), "gen");
  }
  hf_status st = HF_OK;
  if (a.hgt == "tweak") {
    st = hf_generator_tweak(&params, &gen);
  } else if (a.hgt == "model") {
    st = hf_generator_model(emb, &gen);
  } else if (a.hgt == "hybrid") {
    st = hf_generator_hybrid(emb, &params, &gen);
  } else {
    if (a.table.empty()) throw Failure{"gen", HF_ERR_INVALID_ARGUMENT, "--table required"};
    st = hf_generator_import(a.table.c_str(), &gen);
  }
  hf_embedding_free(emb);
  check(st, "gen");

  int exit_code = kExitOk;
  std::string line;
  std::uint64_t index = 0;
  while (std::getline(std::cin, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    char* row = nullptr;
    if (hf_generate(gen, line.c_str(), a.count, index++, &row) == HF_OK) {
      std::cout << take(row) << '\n';
    } else {
      std::cerr << "gen: " << line << ": " << hf_last_error() << '\n';
      exit_code = kExitRuntime;
    }
  }
  hf_generator_free(gen);
  return exit_code;
}

struct PassgenArgs {
  std::string corpus;
  std::size_t order = 3;
  double alpha = 0.01;
  std::size_t count = 1000;
  std::uint64_t seed = 0;
  std::size_t min_len = 8;
  std::size_t max_len = 32;
};

int passgen_direct(const PassgenArgs& a) {
  hf_markov* model = nullptr;
  check(hf_markov_train(a.corpus.c_str(), a.min_len, a.order, a.alpha, &model), "passgen");
  char* lines = nullptr;
  const hf_status st = hf_markov_sample(model, a.count, a.min_len, a.max_len, a.seed, &lines);
  hf_markov_free(model);
  check(st, "passgen");
  std::cout << take(lines);
  return kExitOk;
}

struct LlmArgs {
  std::string endpoint;
  std::string cache;
};

int llm_stdin(const LlmArgs& a) {
  const std::string endpoint = read_file(a.endpoint);
  int exit_code = kExitOk;
  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    char* row = nullptr;
    if (hf_llm_honeywords(endpoint.c_str(), line.c_str(),
                          a.cache.empty() ? nullptr : a.cache.c_str(), &row) == HF_OK) {
      std::cout << take(row) << '\n';
    } else {
      std::cerr << "llm: " << line << ": " << hf_last_error() << '\n';
      exit_code = kExitRuntime;
    }
  }
  return exit_code;
}

struct ReportArgs {
  std::vector<std::string> dirs;
  std::string average = "per-dataset";
  std::string out;
  bool force = false;
};

int report(const ReportArgs& a) {
  std::vector<const char*> dirs;
  for (const auto& d : a.dirs) dirs.push_back(d.c_str());
  char* result = nullptr;
  check(hf_report(dirs.data(), dirs.size(), a.average.c_str(), a.force ? 1 : 0, &result),
        "report");
  const std::string text = take(result);
  const auto doc = nlohmann::json::parse(text);
  for (const auto& run : doc.at("runs")) {
    char* grid = nullptr;
    nlohmann::json single = run;
    single["n_accounts"] = run.at("n_accounts");
    check(hf_format_grid(single.dump().c_str(), &grid), "report");
    std::cout << take(grid) << '\n';
  }
  std::cout << "average (" << a.average << ")\n";
  char* grid = nullptr;
  check(hf_format_grid(text.c_str(), &grid), "report");
  std::cout << take(grid);
  for (const auto& w : doc.at("warnings")) std::cerr << "warning: " << w.get<std::string>() << '\n';
  if (!a.out.empty()) {
    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw Failure{"report", HF_ERR_IO, "cannot write " + a.out};
    out << text << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Honeyword generation and CNN attack workbench"};
  app.set_version_flag("--version", hf_version());
  app.require_subcommand(1);

  Common common;
  const char* stages[][2] = {
      {"ingest", "Load and split the corpora"},
      {"train-embed", "Train the password-model embeddings"},
      {"train-clf", "Train the CNN classifier"},
      {"eval", "Rank evaluation accounts and report success rates"},
      {"replay", "Replay the ranked attack against the simulated vault"},
      {"run", "Run every stage"},
  };
  std::vector<std::pair<CLI::App*, std::string>> stage_cmds;
  for (const auto& s : stages) {
    auto* cmd = app.add_subcommand(s[0], s[1]);
    common.add_to(cmd, true);
    stage_cmds.emplace_back(cmd, s[0]);
  }

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "Generate honeywords (stdin filter, or pipeline stage with --config)");
  common.add_to(gen, false);
  gen->add_option("--count", gen_args.count, "Honeywords per password");
  gen->add_option("--p", gen_args.p, "Special-symbol substitution probability");
  gen->add_option("--q", gen_args.q, "Digit substitution probability");
  gen->add_option("--f", gen_args.f, "Lower-to-upper probability");
  gen->add_option("--g", gen_args.g, "Upper-to-lower probability");
  gen->add_option("--embedding", gen_args.embedding, "Embedding model (model, hybrid)");
  gen->add_option("--table", gen_args.table, "Honeyword table (import)");

  PassgenArgs pg_args;
  auto* pg = app.add_subcommand("passgen", "Sample synthetic passwords (or pipeline stage with --config)");
  common.add_to(pg, false);
  pg->add_option("--corpus", pg_args.corpus, "Training password file");
  pg->add_option("--order", pg_args.order, "Markov order")->check(CLI::Range(1, 5));
  pg->add_option("--alpha", pg_args.alpha, "Add-alpha smoothing");
  pg->add_option("--count", pg_args.count, "Passwords to sample");
  pg->add_option("--min-len", pg_args.min_len, "Minimum length");
  pg->add_option("--max-len", pg_args.max_len, "Maximum length");

  LlmArgs llm_args;
  auto* llm = app.add_subcommand("llm", "Fetch honeywords from a completion endpoint");
  llm->add_option("--endpoint", llm_args.endpoint, "Endpoint config (JSON)")->required();
  llm->add_option("--cache", llm_args.cache, "Append rows to this honeyword table");

  ReportArgs report_args;
  auto* rep = app.add_subcommand("report", "Combine run reports");
  rep->add_option("dirs", report_args.dirs, "Run directories")->required();
  rep->add_option("--average", report_args.average, "Averaging over runs")
      ->check(CLI::IsMember({"per-dataset", "pooled"}));
  rep->add_option("--out", report_args.out, "Write the combined JSON here");
  rep->add_flag("--force", report_args.force, "Accept mismatched config hashes");

  auto* cfg = app.add_subcommand("config", "Print the resolved config and its hash");
  common.add_to(cfg, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    for (const auto& [cmd, name] : stage_cmds) {
      if (cmd->parsed()) return run_stage(name, common);
    }
    if (gen->parsed()) {
      if (!common.config.empty()) return run_stage("gen", common);
      if (common.seed) gen_args.seed = *common.seed;
      if (!common.hgt.empty()) gen_args.hgt = common.hgt;
      return gen_stdin(gen_args);
    }
    if (pg->parsed()) {
      if (!common.config.empty()) return run_stage("passgen", common);
      if (pg_args.corpus.empty()) {
        std::cerr << "passgen: --corpus or --config required\n";
        return kExitUsage;
      }
      if (common.seed) pg_args.seed = *common.seed;
      return passgen_direct(pg_args);
    }
    if (llm->parsed()) return llm_stdin(llm_args);
    if (rep->parsed()) return report(report_args);
    if (cfg->parsed()) {
      const std::string config = read_file(common.config);
      char* text = nullptr;
      char* hash = nullptr;
      check(hf_config_resolve(config.c_str(), common.options_json().c_str(), &text, &hash),
            "config");
      std::cout << take(text) << "\nconfig_hash " << take(hash) << '\n';
      return kExitOk;
    }
  } catch (const Failure& f) {
    std::cerr << "honeyfilter " << f.stage << ": " << hf_status_name(f.status) << ": "
              << f.message << '\n';
    return f.status == HF_ERR_INVALID_ARGUMENT || f.status == HF_ERR_PARSE ? kExitUsage
                                                                             : kExitRuntime;
  }
  return kExitUsage;
}
