#include "honeyfilter/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "honeyfilter/error.hpp"
#include "honeyfilter/rng.hpp"

namespace honeyfilter {

using nlohmann::json;

const char* scenario_kind_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kSameService: return "same-service";
    case ScenarioKind::kCrossService: return "cross-service";
    case ScenarioKind::kSelfTrained: return "self-trained";
  }
  return "unknown";
}

ScenarioKind parse_scenario_kind(std::string_view name) {
  for (auto k : {ScenarioKind::kSameService, ScenarioKind::kCrossService,
                 ScenarioKind::kSelfTrained}) {
    if (name == scenario_kind_name(k)) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown scenario kind '" + std::string(name) + "'");
}

GeneratorKind parse_generator_kind(std::string_view name) {
  for (auto k : {GeneratorKind::kTweak, GeneratorKind::kPasswordModel, GeneratorKind::kHybrid,
                 GeneratorKind::kImported}) {
    if (name == generator_kind_name(k)) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown hgt '" + std::string(name) + "'");
}

namespace {

// Reads fields from one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail("expected an object");
  }

  template <typename V>
  void get(const char* key, V& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<V>();
    } catch (const json::exception&) {
      fail(std::string("bad value for '") + key + "'");
    }
  }

  const json* sub(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string path(const char* key) const { return where_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail("unknown key '" + it.key() + "'");
    }
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::kParse, where_ + ": " + why);
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

const char* activation_name(nn::Activation a) {
  return a == nn::Activation::kRelu ? "relu" : "tanh";
}

}  // namespace

json arch_to_json(const CnnArch& arch) {
  json j;
  j["alphabet_size"] = arch.alphabet_size;
  j["max_len"] = arch.max_len;
  j["embed_dim"] = arch.embed_dim;
  j["activation"] = activation_name(arch.activation);
  j["conv"] = json::array();
  for (const auto& c : arch.conv) {
    j["conv"].push_back({{"filters", c.filters},
                         {"kernel_width", c.kernel_width},
                         {"pool_width", c.pool_width},
                         {"dropout", c.dropout}});
  }
  j["dense"] = json::array();
  for (const auto& d : arch.dense) {
    j["dense"].push_back({{"units", d.units}, {"dropout", d.dropout}});
  }
  return j;
}

CnnArch arch_from_json(const json& j) {
  CnnArch arch = CnnArch::defaults(0);
  ObjectReader r(j, "cnn");
  r.get("alphabet_size", arch.alphabet_size);
  r.get("max_len", arch.max_len);
  r.get("embed_dim", arch.embed_dim);
  std::string act = activation_name(arch.activation);
  r.get("activation", act);
  if (act == "relu") {
    arch.activation = nn::Activation::kRelu;
  } else if (act == "tanh") {
    arch.activation = nn::Activation::kTanh;
  } else {
    r.fail("activation must be relu or tanh");
  }
  if (const json* conv = r.sub("conv")) {
    if (!conv->is_array()) r.fail("conv must be an array");
    arch.conv.clear();
    for (const auto& c : *conv) {
      ConvBlockSpec spec;
      ObjectReader cr(c, "cnn.conv[]");
      cr.get("filters", spec.filters);
      cr.get("kernel_width", spec.kernel_width);
      cr.get("pool_width", spec.pool_width);
      cr.get("dropout", spec.dropout);
      cr.finish();
      arch.conv.push_back(spec);
    }
  }
  if (const json* dense = r.sub("dense")) {
    if (!dense->is_array()) r.fail("dense must be an array");
    arch.dense.clear();
    for (const auto& d : *dense) {
      DenseBlockSpec spec;
      ObjectReader dr(d, "cnn.dense[]");
      dr.get("units", spec.units);
      dr.get("dropout", spec.dropout);
      dr.finish();
      arch.dense.push_back(spec);
    }
  }
  r.finish();
  return arch;
}

json tweak_to_json(const TweakParams& t) {
  return {{"p", t.p},
          {"q", t.q},
          {"f", t.f},
          {"g", t.g},
          {"boost", t.boost},
          {"boost_mode", t.boost_mode == BoostMode::kMultiplicative ? "multiplicative" : "additive"},
          {"seed", t.rng_seed},
          {"attempts_per_word", t.attempts_per_word}};
}

TweakParams tweak_from_json(const json& j) {
  TweakParams t;
  ObjectReader r(j, "hgt.tweak");
  r.get("p", t.p);
  r.get("q", t.q);
  r.get("f", t.f);
  r.get("g", t.g);
  r.get("boost", t.boost);
  std::string mode = "multiplicative";
  r.get("boost_mode", mode);
  if (mode == "multiplicative") {
    t.boost_mode = BoostMode::kMultiplicative;
  } else if (mode == "additive") {
    t.boost_mode = BoostMode::kAdditive;
  } else {
    r.fail("boost_mode must be multiplicative or additive");
  }
  r.get("seed", t.rng_seed);
  r.get("attempts_per_word", t.attempts_per_word);
  r.finish();
  return t;
}

json embed_to_json(const EmbedHyper& h) {
  return {{"dim", h.dim},       {"ngram_min", h.ngram_min}, {"ngram_max", h.ngram_max},
          {"window", h.window}, {"negatives", h.negatives}, {"epochs", h.epochs},
          {"learning_rate", h.learning_rate}, {"buckets", h.buckets}, {"seed", h.seed}};
}

EmbedHyper embed_from_json(const json& j) {
  EmbedHyper h;
  ObjectReader r(j, "hgt.embedding");
  r.get("dim", h.dim);
  r.get("ngram_min", h.ngram_min);
  r.get("ngram_max", h.ngram_max);
  r.get("window", h.window);
  r.get("negatives", h.negatives);
  r.get("epochs", h.epochs);
  r.get("learning_rate", h.learning_rate);
  r.get("buckets", h.buckets);
  r.get("seed", h.seed);
  r.finish();
  return h;
}

json train_to_json(const TrainConfig& t) {
  return {{"epochs", t.epochs},
          {"batch_size", t.batch_size},
          {"learning_rate", t.learning_rate},
          {"optimizer", t.optimizer == OptimizerKind::kAdam ? "adam" : "sgd"},
          {"beta1", t.beta1},
          {"beta2", t.beta2},
          {"epsilon", t.epsilon},
          {"seed", t.seed},
          {"patience", t.patience}};
}

TrainConfig train_from_json(const json& j, TrainConfig t) {
  ObjectReader r(j, "train");
  r.get("epochs", t.epochs);
  r.get("batch_size", t.batch_size);
  r.get("learning_rate", t.learning_rate);
  std::string opt = t.optimizer == OptimizerKind::kAdam ? "adam" : "sgd";
  r.get("optimizer", opt);
  if (opt == "adam") {
    t.optimizer = OptimizerKind::kAdam;
  } else if (opt == "sgd") {
    t.optimizer = OptimizerKind::kSgd;
  } else {
    r.fail("optimizer must be adam or sgd");
  }
  r.get("beta1", t.beta1);
  r.get("beta2", t.beta2);
  r.get("epsilon", t.epsilon);
  r.get("seed", t.seed);
  r.get("patience", t.patience);
  r.finish();
  return t;
}

std::uint64_t RunConfig::stage_seed(std::string_view stage) const {
  const std::optional<std::uint64_t>* slot = nullptr;
  if (stage == "split") slot = &seeds.split;
  if (stage == "tweak") slot = &seeds.tweak;
  if (stage == "embedding") slot = &seeds.embedding;
  if (stage == "passgen") slot = &seeds.passgen;
  if (stage == "cnn") slot = &seeds.cnn;
  if (stage == "eval") slot = &seeds.eval;
  if (stage == "vault") slot = &seeds.vault;
  if (slot == nullptr) throw Error(ErrorCode::kInvalidArgument, "unknown stage seed");
  return slot->has_value() ? **slot : derive_seed(seed, stage);
}

RunConfig RunConfig::resolved() const {
  RunConfig r = *this;
  r.hgt.tweak.rng_seed = stage_seed("tweak");
  r.hgt.embedding.seed = stage_seed("embedding");
  r.train.seed = stage_seed("cnn");
  return r;
}

void RunConfig::validate() const {
  auto bad = [](const std::string& why) { return Error(ErrorCode::kInvalidArgument, why); };
  if (corpus.train.empty()) throw bad("corpus.train is required");
  if (corpus.min_len < 1 || corpus.max_len < corpus.min_len) {
    throw bad("corpus lengths must satisfy 1 <= min_len <= max_len");
  }
  SplitSpec{corpus.train_frac, corpus.val_frac, corpus.test_frac, 0}.validate();
  hgt.tweak.validate();
  hgt.embedding.validate();
  if (hgt.kind == GeneratorKind::kImported && hgt.import_path.empty()) {
    throw bad("hgt.import is required for the import generator");
  }
  if (passgen.order < 1 || passgen.order > 5) throw bad("passgen.order must lie in [1, 5]");
  if (!(passgen.alpha > 0.0)) throw bad("passgen.alpha must be > 0");
  CnnArch arch = cnn;
  arch.alphabet_size = 3;
  arch.max_len = corpus.max_len;
  arch.validate();
  train.validate();
  if (scenario.k < 2) throw bad("scenario.k must be >= 2");
  if (scenario.accounts < 1) throw bad("scenario.accounts must be >= 1");
  for (auto x : scenario.attempts) {
    if (x < 1 || x > scenario.k) throw bad("scenario.attempts must lie in [1, k]");
  }
  if (vault.th1 < 1 || vault.th2 < vault.th1) throw bad("vault thresholds need 1 <= th1 <= th2");
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  ObjectReader r(j, "config");
  r.get("seed", c.seed);
  r.get("output_dir", c.output_dir);
  if (const json* s = r.sub("corpus")) {
    ObjectReader cr(*s, "corpus");
    cr.get("train", c.corpus.train);
    cr.get("eval", c.corpus.eval);
    cr.get("generated", c.corpus.generated);
    cr.get("min_len", c.corpus.min_len);
    cr.get("max_len", c.corpus.max_len);
    cr.get("train_frac", c.corpus.train_frac);
    cr.get("val_frac", c.corpus.val_frac);
    cr.get("test_frac", c.corpus.test_frac);
    cr.finish();
  }
  if (const json* s = r.sub("hgt")) {
    ObjectReader hr(*s, "hgt");
    std::string kind = generator_kind_name(c.hgt.kind);
    hr.get("kind", kind);
    try {
      c.hgt.kind = parse_generator_kind(kind);
    } catch (const Error& e) {
      hr.fail(e.what());
    }
    if (const json* t = hr.sub("tweak")) c.hgt.tweak = tweak_from_json(*t);
    if (const json* e = hr.sub("embedding")) c.hgt.embedding = embed_from_json(*e);
    hr.get("import", c.hgt.import_path);
    hr.finish();
  }
  if (const json* s = r.sub("passgen")) {
    ObjectReader pr(*s, "passgen");
    pr.get("order", c.passgen.order);
    pr.get("alpha", c.passgen.alpha);
    pr.get("count", c.passgen.count);
    pr.finish();
  }
  if (const json* s = r.sub("cnn")) c.cnn = arch_from_json(*s);
  if (const json* s = r.sub("train")) c.train = train_from_json(*s);
  if (const json* s = r.sub("scenario")) {
    ObjectReader sr(*s, "scenario");
    std::string kind = scenario_kind_name(c.scenario.kind);
    sr.get("kind", kind);
    try {
      c.scenario.kind = parse_scenario_kind(kind);
    } catch (const Error& e) {
      sr.fail(e.what());
    }
    sr.get("k", c.scenario.k);
    sr.get("accounts", c.scenario.accounts);
    sr.get("train_passwords", c.scenario.train_passwords);
    sr.get("attempts", c.scenario.attempts);
    sr.finish();
  }
  if (const json* s = r.sub("vault")) {
    ObjectReader vr(*s, "vault");
    vr.get("th1", c.vault.th1);
    vr.get("th2", c.vault.th2);
    std::string hash = c.vault.hash == HashMode::kPlain ? "plain" : "salted";
    vr.get("hash", hash);
    if (hash == "plain") {
      c.vault.hash = HashMode::kPlain;
    } else if (hash == "salted") {
      c.vault.hash = HashMode::kSaltedDigest;
    } else {
      vr.fail("hash must be plain or salted");
    }
    vr.get("fail_counts", c.vault.fail_counts);
    vr.finish();
  }
  if (const json* s = r.sub("seeds")) {
    ObjectReader sr(*s, "seeds");
    auto opt = [&](const char* key, std::optional<std::uint64_t>& slot) {
      std::uint64_t v = 0;
      sr.get(key, v);
      if (s->contains(key)) slot = v;
    };
    opt("split", c.seeds.split);
    opt("tweak", c.seeds.tweak);
    opt("embedding", c.seeds.embedding);
    opt("passgen", c.seeds.passgen);
    opt("cnn", c.seeds.cnn);
    opt("eval", c.seeds.eval);
    opt("vault", c.seeds.vault);
    sr.finish();
  }
  if (const json* s = r.sub("llm")) {
    LlmEndpoint e;
    ObjectReader lr(*s, "llm");
    lr.get("url", e.url);
    lr.get("model", e.model);
    lr.get("auth_env", e.auth_env);
    lr.get("prompt_template", e.prompt_template);
    lr.get("max_retries", e.max_retries);
    std::int64_t backoff = e.backoff.count();
    std::int64_t interval = e.min_interval.count();
    lr.get("backoff_ms", backoff);
    lr.get("min_interval_ms", interval);
    e.backoff = std::chrono::milliseconds(backoff);
    e.min_interval = std::chrono::milliseconds(interval);
    lr.get("timeout_seconds", e.timeout_seconds);
    lr.finish();
    c.llm = e;
  }
  r.finish();
  return c;
}

json config_to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["corpus"] = {{"train", c.corpus.train},           {"eval", c.corpus.eval},
                 {"generated", c.corpus.generated},   {"min_len", c.corpus.min_len},
                 {"max_len", c.corpus.max_len},       {"train_frac", c.corpus.train_frac},
                 {"val_frac", c.corpus.val_frac},     {"test_frac", c.corpus.test_frac}};
  j["hgt"] = {{"kind", generator_kind_name(c.hgt.kind)},
              {"tweak", tweak_to_json(c.hgt.tweak)},
              {"embedding", embed_to_json(c.hgt.embedding)},
              {"import", c.hgt.import_path}};
  j["passgen"] = {{"order", c.passgen.order}, {"alpha", c.passgen.alpha},
                  {"count", c.passgen.count}};
  j["cnn"] = arch_to_json(c.cnn);
  j["train"] = train_to_json(c.train);
  j["scenario"] = {{"kind", scenario_kind_name(c.scenario.kind)},
                   {"k", c.scenario.k},
                   {"accounts", c.scenario.accounts},
                   {"train_passwords", c.scenario.train_passwords},
                   {"attempts", c.scenario.attempts}};
  j["vault"] = {{"th1", c.vault.th1},
                {"th2", c.vault.th2},
                {"hash", c.vault.hash == HashMode::kPlain ? "plain" : "salted"},
                {"fail_counts", c.vault.fail_counts}};
  json seeds = json::object();
  auto put = [&](const char* key, const std::optional<std::uint64_t>& v) {
    if (v) seeds[key] = *v;
  };
  put("split", c.seeds.split);
  put("tweak", c.seeds.tweak);
  put("embedding", c.seeds.embedding);
  put("passgen", c.seeds.passgen);
  put("cnn", c.seeds.cnn);
  put("eval", c.seeds.eval);
  put("vault", c.seeds.vault);
  j["seeds"] = seeds;
  if (c.llm) {
    j["llm"] = {{"url", c.llm->url},
                {"model", c.llm->model},
                {"auth_env", c.llm->auth_env},
                {"prompt_template", c.llm->prompt_template},
                {"max_retries", c.llm->max_retries},
                {"backoff_ms", c.llm->backoff.count()},
                {"min_interval_ms", c.llm->min_interval.count()},
                {"timeout_seconds", c.llm->timeout_seconds}};
  }
  return j;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

std::uint64_t config_hash(const RunConfig& config) {
  json j = config_to_json(config);
  // The output location does not change results.
  j.erase("output_dir");
  return fnv1a64(j.dump());
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace honeyfilter
