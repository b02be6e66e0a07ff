#include "honeyfilter/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <unordered_set>

#include "honeyfilter/compose.hpp"
#include "honeyfilter/error.hpp"
#include "honeyfilter/log.hpp"
#include "honeyfilter/passgen.hpp"
#include "honeyfilter/rng.hpp"
#include "honeyfilter/tweak.hpp"
#include "honeyfilter/vault.hpp"

namespace honeyfilter {

namespace fs = std::filesystem;
using nlohmann::json;

std::string file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return hash_hex(fnv1a64(buf.str()));
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  for (const auto& l : lines) out << l << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

void write_pairs_tsv(const fs::path& path, const std::vector<LabeledPair>& pairs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  for (const auto& p : pairs) out << p.word << '\t' << static_cast<int>(p.label) << '\n';
}

std::vector<LabeledPair> read_pairs_tsv(const fs::path& path) {
  std::vector<LabeledPair> pairs;
  for (const auto& line : read_lines(path)) {
    const auto cells = split_tabs(line);
    if (cells.size() != 2 || (cells[1] != "0" && cells[1] != "1")) {
      throw Error(ErrorCode::kParse, path.string() + ": malformed pair row");
    }
    pairs.push_back({cells[0], cells[1] == "1" ? Label::kPassword : Label::kHoneyword});
  }
  return pairs;
}

std::unique_ptr<HoneywordGenerator> make_generator(
    const HgtConfig& hgt, std::shared_ptr<const EmbeddingModel> embedding) {
  switch (hgt.kind) {
    case GeneratorKind::kTweak:
      return std::make_unique<TweakGenerator>(hgt.tweak);
    case GeneratorKind::kPasswordModel:
    case GeneratorKind::kHybrid:
      if (!embedding) {
        throw Error(ErrorCode::kInvalidArgument,
                    std::string(generator_kind_name(hgt.kind)) + " generator needs an embedding");
      }
      if (hgt.kind == GeneratorKind::kPasswordModel) {
        return std::make_unique<PasswordModelGenerator>(std::move(embedding));
      }
      return std::make_unique<HybridGenerator>(std::move(embedding), hgt.tweak);
    case GeneratorKind::kImported:
      return std::make_unique<ImportedGenerator>(
          std::make_shared<const ImportedHoneywordTable>(import_honeywords(hgt.import_path)));
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown generator kind");
}

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
}

PasswordCorpus as_corpus(std::vector<std::string> lines, std::string tag) {
  PasswordCorpus c;
  c.entries = std::move(lines);
  c.source_tag = std::move(tag);
  return c;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// Removes every registered artifact unless commit() ran.
class StageScope {
 public:
  StageScope(const fs::path& dir, std::string stage, std::string config_hash)
      : dir_(dir), stage_(std::move(stage)), hash_(std::move(config_hash)) {
    fs::create_directories(dir_);
  }
  StageScope(const StageScope&) = delete;
  StageScope& operator=(const StageScope&) = delete;

  ~StageScope() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& name : outputs_) fs::remove(dir_ / name, ec);
    fs::remove(manifest_path(), ec);
  }

  fs::path output(const std::string& name) {
    outputs_.push_back(name);
    return dir_ / name;
  }
  void input(const std::string& name) { inputs_.push_back(name); }

  void commit(const json& stats) {
    json m;
    m["stage"] = stage_;
    m["tool_version"] = kToolVersion;
    m["config_hash"] = hash_;
    m["inputs"] = json::object();
    for (const auto& name : inputs_) m["inputs"][name] = file_hash(dir_ / name);
    m["outputs"] = json::object();
    for (const auto& name : outputs_) m["outputs"][name] = file_hash(dir_ / name);
    m["stats"] = stats;
    write_json(manifest_path(), m);
    committed_ = true;
  }

 private:
  fs::path manifest_path() const { return dir_ / (stage_ + ".manifest.json"); }

  fs::path dir_;
  std::string stage_;
  std::string hash_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  bool committed_ = false;
};

// Prefixes errors with the stage that raised them.
template <typename F>
json tagged(const char* stage, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), std::string(stage) + ": " + e.what());
  }
}

bool uses_embedding(GeneratorKind kind) {
  return kind == GeneratorKind::kPasswordModel || kind == GeneratorKind::kHybrid;
}

}  // namespace

Pipeline::Pipeline(RunConfig config, bool force)
    : config_(config.resolved()), dir_(config.output_dir), force_(force) {
  config_.validate();
  hash_ = hash_hex(honeyfilter::config_hash(config));
}

void Pipeline::require_upstream(const std::string& stage) const {
  const fs::path manifest = path(stage + ".manifest.json");
  if (!fs::exists(manifest)) {
    throw Error(ErrorCode::kIo, "missing " + manifest.string() + "; run '" + stage + "' first");
  }
  const json m = read_json(manifest);
  const std::string recorded = m.value("config_hash", "");
  if (recorded != hash_) {
    if (!force_) {
      throw Error(ErrorCode::kHashMismatch, stage + " artifacts were produced by config " +
                                                recorded + ", current config is " + hash_ +
                                                " (use --force to override)");
    }
    log_warning(stage + " artifacts come from a different config (" + recorded + ")");
  }
}

json Pipeline::ingest() {
  return tagged("ingest", [&] {
    StageScope scope(dir_, "ingest", hash_);
    const auto& cc = config_.corpus;
    PasswordCorpus corpus = load_passwords(cc.train, cc.min_len);
    const SplitSpec spec{cc.train_frac, cc.val_frac, cc.test_frac, config_.stage_seed("split")};
    const CorpusSplit parts = split(corpus, spec);
    write_lines(scope.output("split.train.txt"), parts.train.entries);
    write_lines(scope.output("split.val.txt"), parts.val.entries);
    write_lines(scope.output("split.test.txt"), parts.test.entries);

    json stats;
    stats["train_corpus"] = {{"entries", corpus.size()},
                             {"dropped_short", corpus.dropped_short},
                             {"skipped_invalid_utf8", corpus.skipped_invalid_utf8}};
    stats["split"] = {{"train", parts.train.size()},
                      {"val", parts.val.size()},
                      {"test", parts.test.size()}};

    std::vector<std::string> target = parts.test.entries;
    const auto kind = config_.scenario.kind;
    if (kind == ScenarioKind::kCrossService && cc.eval.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "cross-service needs corpus.eval");
    }
    if (!cc.eval.empty() && kind != ScenarioKind::kSameService) {
      PasswordCorpus eval = load_passwords(cc.eval, cc.min_len);
      stats["eval_corpus"] = {{"entries", eval.size()},
                              {"dropped_short", eval.dropped_short},
                              {"skipped_invalid_utf8", eval.skipped_invalid_utf8}};
      target = std::move(eval.entries);
    }
    write_lines(scope.output("target.txt"), target);
    stats["target"] = target.size();
    scope.commit(stats);
    return stats;
  });
}

json Pipeline::passgen() {
  return tagged("passgen", [&] {
    require_upstream("ingest");
    StageScope scope(dir_, "passgen", hash_);
    scope.input("split.train.txt");
    std::vector<std::string> generated;
    json stats;
    if (!config_.corpus.generated.empty()) {
      generated = load_passwords(config_.corpus.generated, config_.corpus.min_len).entries;
      stats["source"] = "external";
    } else {
      const auto corpus = as_corpus(read_lines(path("split.train.txt")), "train");
      const auto model = train_markov(corpus, config_.passgen.order, config_.passgen.alpha);
      generated = sample_passwords(model, config_.passgen.count, config_.corpus.min_len,
                                   config_.corpus.max_len, config_.stage_seed("passgen"));
      stats["source"] = "markov";
      stats["order"] = config_.passgen.order;
    }
    if (generated.empty()) throw Error(ErrorCode::kEmptyCorpus, "no generated passwords");
    write_lines(scope.output("passgen.txt"), generated);
    stats["count"] = generated.size();
    scope.commit(stats);
    return stats;
  });
}

json Pipeline::train_embed() {
  return tagged("train-embed", [&] {
    require_upstream("ingest");
    const auto kind = config_.scenario.kind;
    if (kind == ScenarioKind::kSelfTrained) require_upstream("passgen");
    StageScope scope(dir_, "train-embed", hash_);

    const auto full = concat(concat(read_lines(path("split.train.txt")),
                                    read_lines(path("split.val.txt"))),
                             read_lines(path("split.test.txt")));
    std::vector<std::string> attack = full;
    if (kind == ScenarioKind::kSelfTrained) {
      scope.input("passgen.txt");
      attack = read_lines(path("passgen.txt"));
    }
    json stats;
    EmbedHyper hyper = config_.hgt.embedding;
    const auto attack_model = train_embedding(as_corpus(attack, "attack"), hyper);
    attack_model.save(scope.output("embedding.attack.bin"));
    scope.output("embedding.attack.bin.vocab");
    stats["attack"] = {{"vocab", attack_model.vocab_size()},
                       {"final_loss", attack_model.epoch_losses().back()}};

    // Same-service defenders and attackers share one password model.
    if (kind != ScenarioKind::kSameService) {
      const bool own_target = !config_.corpus.eval.empty();
      hyper.seed = derive_seed(hyper.seed, "target");
      const auto target_model = train_embedding(
          as_corpus(own_target ? read_lines(path("target.txt")) : full, "target"), hyper);
      target_model.save(scope.output("embedding.target.bin"));
      scope.output("embedding.target.bin.vocab");
      stats["target"] = {{"vocab", target_model.vocab_size()},
                         {"final_loss", target_model.epoch_losses().back()}};
    }
    scope.commit(stats);
    return stats;
  });
}

json Pipeline::gen() {
  return tagged("gen", [&] {
    require_upstream("ingest");
    const auto kind = config_.scenario.kind;
    if (kind == ScenarioKind::kSelfTrained) require_upstream("passgen");
    if (uses_embedding(config_.hgt.kind)) require_upstream("train-embed");
    StageScope scope(dir_, "gen", hash_);

    std::shared_ptr<const EmbeddingModel> attack_embedding, target_embedding;
    if (uses_embedding(config_.hgt.kind)) {
      attack_embedding = std::make_shared<const EmbeddingModel>(
          EmbeddingModel::load(path("embedding.attack.bin")));
      target_embedding = kind == ScenarioKind::kSameService
                             ? attack_embedding
                             : std::make_shared<const EmbeddingModel>(
                                   EmbeddingModel::load(path("embedding.target.bin")));
    }

    std::vector<std::string> train_pw, val_pw;
    if (kind == ScenarioKind::kSelfTrained) {
      scope.input("passgen.txt");
      const auto& cc = config_.corpus;
      const double train_share = cc.train_frac / (cc.train_frac + cc.val_frac);
      const SplitSpec spec{train_share, (1.0 - train_share) / 2, (1.0 - train_share) / 2,
                           derive_seed(config_.stage_seed("split"), "passgen")};
      const auto parts = split(as_corpus(read_lines(path("passgen.txt")), "passgen"), spec);
      train_pw = parts.train.entries;
      val_pw = concat(parts.val.entries, parts.test.entries);
    } else {
      scope.input("split.train.txt");
      scope.input("split.val.txt");
      train_pw = read_lines(path("split.train.txt"));
      val_pw = read_lines(path("split.val.txt"));
    }
    const std::size_t limit = config_.scenario.train_passwords;
    if (limit > 0 && train_pw.size() > limit) train_pw.resize(limit);

    HgtConfig attack_hgt = config_.hgt;
    HgtConfig val_hgt = config_.hgt;
    val_hgt.tweak.rng_seed = derive_seed(config_.hgt.tweak.rng_seed, "val");
    HgtConfig target_hgt = config_.hgt;
    target_hgt.tweak.rng_seed = derive_seed(config_.hgt.tweak.rng_seed, "target");

    const auto train_pairs =
        build_training_pairs(train_pw, *make_generator(attack_hgt, attack_embedding));
    const auto val_pairs = build_training_pairs(val_pw, *make_generator(val_hgt, attack_embedding));
    if (train_pairs.pairs.empty()) throw Error(ErrorCode::kEmptyCorpus, "no training pairs");
    write_pairs_tsv(scope.output("pairs.train.tsv"), train_pairs.pairs);
    write_pairs_tsv(scope.output("pairs.val.tsv"), val_pairs.pairs);

    scope.input("target.txt");
    std::unordered_set<std::string> exclusion(train_pw.begin(), train_pw.end());
    exclusion.insert(val_pw.begin(), val_pw.end());
    EvalAccountOptions options;
    options.k = config_.scenario.k;
    options.n_accounts = config_.scenario.accounts;
    options.seed = config_.stage_seed("eval");
    const auto accounts = build_eval_accounts(
        read_lines(path("target.txt")), *make_generator(target_hgt, target_embedding), options,
        exclusion);
    if (accounts.accounts.empty()) throw Error(ErrorCode::kEmptyCorpus, "no evaluation accounts");
    if (accounts.accounts.size() < options.n_accounts) {
      log_warning("only " + std::to_string(accounts.accounts.size()) + " of " +
                  std::to_string(options.n_accounts) + " evaluation accounts could be built");
    }
    write_accounts_tsv(scope.output("accounts.tsv"), accounts.accounts);

    json stats;
    stats["train_pairs"] = train_pairs.pairs.size();
    stats["train_skipped"] = train_pairs.skipped;
    stats["val_pairs"] = val_pairs.pairs.size();
    stats["val_skipped"] = val_pairs.skipped;
    stats["accounts"] = accounts.accounts.size();
    stats["accounts_skipped"] = accounts.skipped;
    stats["accounts_excluded"] = accounts.excluded;
    scope.commit(stats);
    return stats;
  });
}

json Pipeline::train_clf() {
  return tagged("train-clf", [&] {
    require_upstream("gen");
    StageScope scope(dir_, "train-clf", hash_);
    scope.input("pairs.train.tsv");
    scope.input("pairs.val.tsv");
    const auto pairs = read_pairs_tsv(path("pairs.train.tsv"));
    const auto val = read_pairs_tsv(path("pairs.val.tsv"));
    std::vector<std::string> words;
    for (const auto& p : pairs) words.push_back(p.word);
    const Alphabet alphabet = build_alphabet(words);
    CnnArch arch = config_.cnn;
    arch.alphabet_size = alphabet.size();
    arch.max_len = config_.corpus.max_len;

    const auto result = train_classifier(arch, alphabet, pairs, val, config_.train);
    result.classifier.save(scope.output("classifier.ckpt"));
    write_text(scope.output("history.csv"), result.history.to_csv());

    json stats;
    stats["pairs"] = pairs.size();
    stats["val_pairs"] = val.size();
    stats["alphabet_size"] = alphabet.size();
    stats["epochs_run"] = result.history.epochs.size();
    stats["best_epoch"] = result.history.best_epoch;
    stats["early_stopped"] = result.history.early_stopped;
    if (!result.history.epochs.empty()) {
      const auto& best = result.history.best_epoch
                             ? result.history.epochs[result.history.best_epoch - 1]
                             : result.history.epochs.back();
      stats["val_loss"] = best.val_loss;
      stats["val_acc"] = best.val_acc;
    }
    scope.commit(stats);
    return stats;
  });
}

json Pipeline::eval() {
  return tagged("eval", [&] {
    require_upstream("gen");
    require_upstream("train-clf");
    StageScope scope(dir_, "eval", hash_);
    scope.input("classifier.ckpt");
    scope.input("accounts.tsv");
    const auto classifier = Classifier::load(path("classifier.ckpt"));
    const auto accounts = read_accounts_tsv(path("accounts.tsv"));

    const auto rankings = rank_accounts(classifier_scorer(classifier), accounts);
    FlatnessCurve curve = flatness_curve(rankings, accounts);

    // Held-out pairs: each real password against its first honeyword.
    std::vector<LabeledPair> test_pairs;
    for (const auto& a : accounts) {
      test_pairs.push_back({a.real(), Label::kPassword});
      test_pairs.push_back({a.sweetwords[a.real_index == 0 ? 1 : 0], Label::kHoneyword});
    }
    const auto test = evaluate_classifier(classifier, test_pairs);

    json report;
    report["tool_version"] = kToolVersion;
    report["config_hash"] = hash_;
    report["scenario"] = scenario_kind_name(config_.scenario.kind);
    report["hgt"] = generator_kind_name(config_.hgt.kind);
    report["seed"] = config_.seed;
    report["k"] = curve.k;
    report["n_accounts"] = curve.n_accounts;
    report["grid"] = json::array();
    for (const auto& row : reporting_grid(curve, config_.scenario.attempts)) {
      report["grid"].push_back(
          {{"attempts", row.attempts}, {"success", row.success}, {"baseline", row.baseline}});
    }
    report["success_rate"] = curve.success.front();
    report["curve"] = curve.success;
    report["test"] = {{"accuracy", test.accuracy}, {"loss", test.loss}};
    report["gen"] = read_json(path("gen.manifest.json")).at("stats");
    report["training"] = read_json(path("train-clf.manifest.json")).at("stats");

    write_json(scope.output("report.json"), report);
    write_text(scope.output("curve.csv"), curve_to_csv(curve));
    write_text(scope.output("flatness.dat"), curve_to_dat(curve));
    scope.commit({{"success_rate", curve.success.front()}});
    return report;
  });
}

json Pipeline::replay() {
  return tagged("replay", [&] {
    require_upstream("gen");
    require_upstream("train-clf");
    StageScope scope(dir_, "replay", hash_);
    scope.input("classifier.ckpt");
    scope.input("accounts.tsv");
    const auto classifier = Classifier::load(path("classifier.ckpt"));
    const auto accounts = read_accounts_tsv(path("accounts.tsv"));
    const VaultConfig vc = vault_config_from(config_);

    const auto store = scope.output("vault.store.jsonl");
    const auto checker = scope.output("vault.checker.jsonl");
    Vault::build(accounts, vc).save(store, checker);
    Vault vault = Vault::load(store, checker, vc);

    const auto rankings = rank_accounts(classifier_scorer(classifier), accounts);
    const auto curve = flatness_curve(rankings, accounts);
    json rows = json::array();
    ReplayResult last;
    for (auto x : config_.scenario.attempts) {
      vault.reset();
      last = replay_attack(vault, accounts, rankings, x);
      rows.push_back({{"attempts", x},
                      {"breached", last.breached_fraction()},
                      {"breached_before_system_alarm",
                       static_cast<double>(last.breached_before_system_alarm) /
                           static_cast<double>(last.n_accounts)},
                      {"flagged_accounts", last.flagged_accounts},
                      {"system_alarm", last.system_alarm},
                      {"flatness", curve.at(x)},
                      {"within_th1", x <= vc.th1}});
    }
    write_text(scope.output("replay.csv"), last.transcript_csv());
    json out = {{"config_hash", hash_}, {"th1", vc.th1}, {"th2", vc.th2}, {"rows", rows}};
    write_json(scope.output("replay.json"), out);
    scope.commit(json::object());
    return out;
  });
}

json Pipeline::run() {
  ingest();
  if (config_.scenario.kind == ScenarioKind::kSelfTrained) passgen();
  if (uses_embedding(config_.hgt.kind)) train_embed();
  gen();
  train_clf();
  json report = eval();
  replay();
  return report;
}

json combine_reports(const std::vector<fs::path>& dirs, AverageMode mode, bool force) {
  if (dirs.empty()) throw Error(ErrorCode::kInvalidArgument, "no run directories given");
  json out;
  out["runs"] = json::array();
  json warnings = json::array();
  auto problem = [&](const std::string& what) {
    if (!force) throw Error(ErrorCode::kHashMismatch, what + " (use --force to override)");
    warnings.push_back(what);
  };

  std::vector<FlatnessCurve> curves;
  std::vector<std::size_t> attempts;
  for (const auto& dir : dirs) {
    const json report = read_json(dir / "report.json");
    const std::string hash = report.at("config_hash");
    std::vector<fs::path> manifests;
    for (const auto& entry : fs::directory_iterator(dir)) {
      const auto name = entry.path().filename().string();
      if (name.size() > 14 && name.ends_with(".manifest.json")) manifests.push_back(entry.path());
    }
    std::sort(manifests.begin(), manifests.end());
    for (const auto& mpath : manifests) {
      const json m = read_json(mpath);
      if (m.value("config_hash", "") != hash) {
        problem(mpath.string() + " has config hash " + m.value("config_hash", "") +
                ", report has " + hash);
      }
      for (const char* section : {"inputs", "outputs"}) {
        const json entries = m.value(section, json::object());
        for (const auto& [name, recorded] : entries.items()) {
          const fs::path file = dir / name;
          const std::string actual = fs::exists(file) ? file_hash(file) : "missing";
          if (actual != recorded.get<std::string>()) {
            problem(file.string() + " changed since " + m.value("stage", "?") + " recorded it");
          }
        }
      }
    }
    FlatnessCurve c;
    c.k = report.at("k");
    c.n_accounts = report.at("n_accounts");
    c.success = report.at("curve").get<std::vector<double>>();
    curves.push_back(c);
    if (attempts.empty()) {
      for (const auto& row : report.at("grid")) attempts.push_back(row.at("attempts"));
    }
    out["runs"].push_back({{"config_hash", hash},
                           {"scenario", report.at("scenario")},
                           {"hgt", report.at("hgt")},
                           {"k", c.k},
                           {"n_accounts", c.n_accounts},
                           {"grid", report.at("grid")}});
  }

  FlatnessCurve avg;
  if (mode == AverageMode::kPerDataset) {
    avg = average_curves(curves);
  } else {
    avg.k = curves.front().k;
    avg.success.assign(avg.k, 0.0);
    for (const auto& c : curves) {
      if (c.k != avg.k) throw Error(ErrorCode::kInvalidArgument, "cannot pool curves of mixed k");
      avg.n_accounts += c.n_accounts;
      for (std::size_t i = 0; i < avg.k; ++i) {
        avg.success[i] += c.success[i] * static_cast<double>(c.n_accounts);
      }
    }
    for (auto& s : avg.success) s /= static_cast<double>(avg.n_accounts);
  }
  json grid = json::array();
  for (const auto& row : reporting_grid(avg, attempts)) {
    grid.push_back({{"attempts", row.attempts}, {"success", row.success}, {"baseline", row.baseline}});
  }
  out["average"] = {{"mode", mode == AverageMode::kPooled ? "pooled" : "per-dataset"},
                    {"k", avg.k},
                    {"n_accounts", avg.n_accounts},
                    {"grid", grid},
                    {"curve", avg.success}};
  out["warnings"] = warnings;
  return out;
}

std::string format_grid(const json& report) {
  std::ostringstream out;
  const json& grid = report.contains("average") ? report.at("average").at("grid")
                                                : report.at("grid");
  if (report.contains("scenario")) {
    out << "scenario " << report.at("scenario").get<std::string>() << "  hgt "
        << report.at("hgt").get<std::string>() << "  k " << report.at("k") << "  accounts "
        << report.at("n_accounts") << '\n';
  }
  auto pct = [](double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << v * 100.0 << '%';
    return s.str();
  };
  out << std::left << std::setw(10) << "attempts";
  for (const auto& row : grid) out << std::right << std::setw(9) << row.at("attempts").get<std::size_t>();
  out << '\n' << std::left << std::setw(10) << "success";
  for (const auto& row : grid) out << std::right << std::setw(9) << pct(row.at("success"));
  out << '\n' << std::left << std::setw(10) << "random";
  for (const auto& row : grid) out << std::right << std::setw(9) << pct(row.at("baseline"));
  out << '\n';
  return out.str();
}

}  // namespace honeyfilter
