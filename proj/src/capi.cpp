#include "honeyfilter/honeyfilter.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>

#include <json.hpp>

#include "honeyfilter/compose.hpp"
#include "honeyfilter/config.hpp"
#include "honeyfilter/error.hpp"
#include "honeyfilter/llm.hpp"
#include "honeyfilter/log.hpp"
#include "honeyfilter/passgen.hpp"
#include "honeyfilter/pipeline.hpp"
#include "honeyfilter/tweak.hpp"
#include "honeyfilter/vault.hpp"

using nlohmann::json;
namespace hf = honeyfilter;

struct hf_embedding {
  std::shared_ptr<const hf::EmbeddingModel> model;
};
struct hf_generator {
  std::unique_ptr<hf::HoneywordGenerator> impl;
};
struct hf_markov {
  hf::MarkovModel model;
};
struct hf_classifier {
  hf::Classifier impl;
};
struct hf_vault {
  hf::Vault impl;
};

namespace {

thread_local std::string g_last_error;

hf_status fail(hf_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename F>
hf_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return HF_OK;
  } catch (const hf::Error& e) {
    return fail(static_cast<hf_status>(e.code()), e.what());
  } catch (const json::exception& e) {
    return fail(HF_ERR_PARSE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(HF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(HF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(HF_ERR_INTERNAL, "unknown exception");
  }
}

void require(const void* p, const char* name) {
  if (p == nullptr) {
    throw hf::Error(hf::ErrorCode::kInvalidArgument, std::string(name) + " is NULL");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

hf::TweakParams to_params(const hf_tweak_params* p) {
  hf::TweakParams t;
  if (p == nullptr) return t;
  t.p = p->p;
  t.q = p->q;
  t.f = p->f;
  t.g = p->g;
  t.boost = p->boost;
  t.boost_mode = p->additive_boost ? hf::BoostMode::kAdditive : hf::BoostMode::kMultiplicative;
  t.rng_seed = p->seed;
  t.attempts_per_word = p->attempts_per_word;
  t.validate();
  return t;
}

std::string row(std::string_view password, const std::vector<std::string>& honeywords) {
  std::ostringstream out;
  hf::write_honeyword_row(out, password, honeywords);
  std::string s = out.str();
  if (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

json parse_or_empty(const char* text) {
  if (text == nullptr || *text == '\0') return json::object();
  return json::parse(text);
}

hf::RunConfig config_with_options(const char* config_json, const json& options) {
  require(config_json, "config_json");
  hf::RunConfig config = hf::config_from_json(json::parse(config_json));
  for (const auto& [key, value] : options.items()) {
    if (key == "seed") {
      config.seed = value.get<std::uint64_t>();
    } else if (key == "output_dir") {
      config.output_dir = value.get<std::string>();
    } else if (key == "k") {
      config.scenario.k = value.get<std::size_t>();
    } else if (key == "accounts") {
      config.scenario.accounts = value.get<std::size_t>();
    } else if (key == "attempts") {
      config.scenario.attempts = value.get<std::vector<std::size_t>>();
    } else if (key == "hgt") {
      config.hgt.kind = hf::parse_generator_kind(value.get<std::string>());
    } else if (key != "force") {
      throw hf::Error(hf::ErrorCode::kInvalidArgument, "unknown option '" + key + "'");
    }
  }
  return config;
}

std::mutex g_log_mutex;
hf_log_fn g_log_fn = nullptr;
void* g_log_user = nullptr;

}  // namespace

extern "C" {

const char* hf_version(void) { return hf::kToolVersion; }

const char* hf_status_name(hf_status status) {
  if (status == HF_OK) return "ok";
  if (status == HF_ERR_INTERNAL) return "internal";
  return hf::error_code_name(static_cast<hf::ErrorCode>(status));
}

const char* hf_last_error(void) { return g_last_error.c_str(); }

void hf_free_string(char* s) { std::free(s); }

void hf_set_log_callback(hf_log_fn fn, void* user) {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  g_log_fn = fn;
  g_log_user = user;
  if (fn == nullptr) {
    hf::set_log_sink(nullptr);
    return;
  }
  hf::set_log_sink([](hf::LogLevel level, std::string_view message) {
    std::lock_guard<std::mutex> inner(g_log_mutex);
    if (g_log_fn) g_log_fn(static_cast<int>(level), std::string(message).c_str(), g_log_user);
  });
}

void hf_tweak_params_default(hf_tweak_params* out) {
  if (out == nullptr) return;
  const hf::TweakParams t;
  *out = {t.p, t.q, t.f, t.g, t.boost, 0, t.rng_seed, t.attempts_per_word};
}

hf_status hf_embedding_train(const char* corpus_path, size_t min_len, const char* hyper_json,
                             hf_embedding** out) {
  return guarded([&] {
    require(corpus_path, "corpus_path");
    require(out, "out");
    const json j = parse_or_empty(hyper_json);
    const hf::EmbedHyper hyper = j.empty() ? hf::EmbedHyper{} : hf::embed_from_json(j);
    auto model = hf::train_embedding(hf::load_passwords(corpus_path, min_len), hyper);
    *out = new hf_embedding{std::make_shared<const hf::EmbeddingModel>(std::move(model))};
  });
}

hf_status hf_embedding_load(const char* path, hf_embedding** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new hf_embedding{
        std::make_shared<const hf::EmbeddingModel>(hf::EmbeddingModel::load(path))};
  });
}

hf_status hf_embedding_save(const hf_embedding* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    model->model->save(path);
  });
}

hf_status hf_embedding_nearest(const hf_embedding* model, const char* word, size_t n,
                               char** out_json) {
  return guarded([&] {
    require(model, "model");
    require(word, "word");
    require(out_json, "out_json");
    json arr = json::array();
    for (const auto& nb : model->model->nearest(word, n)) {
      arr.push_back({{"word", nb.word}, {"score", nb.score}});
    }
    *out_json = dup_string(arr.dump());
  });
}

void hf_embedding_free(hf_embedding* model) { delete model; }

hf_status hf_generator_tweak(const hf_tweak_params* params, hf_generator** out) {
  return guarded([&] {
    require(out, "out");
    *out = new hf_generator{std::make_unique<hf::TweakGenerator>(to_params(params))};
  });
}

hf_status hf_generator_model(const hf_embedding* model, hf_generator** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = new hf_generator{std::make_unique<hf::PasswordModelGenerator>(model->model)};
  });
}

hf_status hf_generator_hybrid(const hf_embedding* model, const hf_tweak_params* params,
                              hf_generator** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = new hf_generator{
        std::make_unique<hf::HybridGenerator>(model->model, to_params(params))};
  });
}

hf_status hf_generator_import(const char* table_path, hf_generator** out) {
  return guarded([&] {
    require(table_path, "table_path");
    require(out, "out");
    auto table = std::make_shared<const hf::ImportedHoneywordTable>(
        hf::import_honeywords(table_path));
    *out = new hf_generator{std::make_unique<hf::ImportedGenerator>(std::move(table))};
  });
}

hf_status hf_generate(const hf_generator* gen, const char* password, size_t count,
                      uint64_t stream, char** out_row) {
  return guarded([&] {
    require(gen, "gen");
    require(password, "password");
    require(out_row, "out_row");
    *out_row = dup_string(row(password, gen->impl->generate(password, count, stream)));
  });
}

void hf_generator_free(hf_generator* gen) { delete gen; }

hf_status hf_llm_honeywords(const char* endpoint_json, const char* password,
                            const char* cache_path, char** out_row) {
  return guarded([&] {
    require(endpoint_json, "endpoint_json");
    require(password, "password");
    require(out_row, "out_row");
    json doc = {{"corpus", {{"train", "-"}}}, {"llm", json::parse(endpoint_json)}};
    const auto config = hf::config_from_json(doc);
    const auto words = hf::fetch_llm_honeywords(password, *config.llm,
                                                cache_path ? cache_path : "");
    *out_row = dup_string(row(password, words));
  });
}

hf_status hf_markov_train(const char* corpus_path, size_t min_len, size_t order, double alpha,
                          hf_markov** out) {
  return guarded([&] {
    require(corpus_path, "corpus_path");
    require(out, "out");
    *out = new hf_markov{hf::train_markov(hf::load_passwords(corpus_path, min_len), order, alpha)};
  });
}

hf_status hf_markov_sample(const hf_markov* model, size_t count, size_t min_len, size_t max_len,
                           uint64_t seed, char** out_lines) {
  return guarded([&] {
    require(model, "model");
    require(out_lines, "out_lines");
    std::string text;
    for (const auto& w : hf::sample_passwords(model->model, count, min_len, max_len, seed)) {
      text += w;
      text += '\n';
    }
    *out_lines = dup_string(text);
  });
}

void hf_markov_free(hf_markov* model) { delete model; }

hf_status hf_classifier_load(const char* path, hf_classifier** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new hf_classifier{hf::Classifier::load(path)};
  });
}

hf_status hf_classifier_score(const hf_classifier* clf, const char* word,
                              double* out_password_prob) {
  return guarded([&] {
    require(clf, "clf");
    require(word, "word");
    require(out_password_prob, "out_password_prob");
    *out_password_prob = clf->impl.score(word);
  });
}

void hf_classifier_free(hf_classifier* clf) { delete clf; }

hf_status hf_vault_load(const char* store_path, const char* checker_path,
                        const char* config_json, hf_vault** out) {
  return guarded([&] {
    require(store_path, "store_path");
    require(checker_path, "checker_path");
    require(out, "out");
    json doc = {{"corpus", {{"train", "-"}}}};
    const json v = parse_or_empty(config_json);
    if (!v.empty()) doc["vault"] = v;
    const auto vc = hf::vault_config_from(hf::config_from_json(doc));
    *out = new hf_vault{hf::Vault::load(store_path, checker_path, vc)};
  });
}

hf_status hf_vault_check(hf_vault* vault, int64_t account_id, const char* submitted,
                         hf_login_outcome* out) {
  return guarded([&] {
    require(vault, "vault");
    require(submitted, "submitted");
    require(out, "out");
    *out = static_cast<hf_login_outcome>(vault->impl.check_login(account_id, submitted));
  });
}

hf_status hf_vault_flags(const hf_vault* vault, int64_t account_id, int* account_flagged,
                         int* system_flagged) {
  return guarded([&] {
    require(vault, "vault");
    if (account_flagged) *account_flagged = vault->impl.account_flagged(account_id) ? 1 : 0;
    if (system_flagged) *system_flagged = vault->impl.system_flagged() ? 1 : 0;
  });
}

void hf_vault_free(hf_vault* vault) { delete vault; }

hf_status hf_run_stage(const char* stage, const char* config_json, const char* options_json,
                       char** out_json) {
  return guarded([&] {
    require(stage, "stage");
    require(out_json, "out_json");
    const json options = parse_or_empty(options_json);
    hf::Pipeline pipeline(config_with_options(config_json, options),
                          options.value("force", false));
    const std::string name = stage;
    json result;
    if (name == "ingest") {
      result = pipeline.ingest();
    } else if (name == "passgen") {
      result = pipeline.passgen();
    } else if (name == "train-embed") {
      result = pipeline.train_embed();
    } else if (name == "gen") {
      result = pipeline.gen();
    } else if (name == "train-clf") {
      result = pipeline.train_clf();
    } else if (name == "eval") {
      result = pipeline.eval();
    } else if (name == "replay") {
      result = pipeline.replay();
    } else if (name == "run") {
      result = pipeline.run();
    } else {
      throw hf::Error(hf::ErrorCode::kInvalidArgument, "unknown stage '" + name + "'");
    }
    *out_json = dup_string(result.dump(2));
  });
}

hf_status hf_config_resolve(const char* config_json, const char* options_json, char** out_json,
                            char** out_hash) {
  return guarded([&] {
    const auto config = config_with_options(config_json, parse_or_empty(options_json));
    config.validate();
    if (out_json) *out_json = dup_string(hf::config_to_json(config).dump(2));
    if (out_hash) *out_hash = dup_string(hf::hash_hex(hf::config_hash(config)));
  });
}

hf_status hf_report(const char* const* dirs, size_t n_dirs, const char* mode, int force,
                    char** out_json) {
  return guarded([&] {
    require(dirs, "dirs");
    require(out_json, "out_json");
    std::vector<std::filesystem::path> paths;
    for (size_t i = 0; i < n_dirs; ++i) {
      require(dirs[i], "dirs[i]");
      paths.emplace_back(dirs[i]);
    }
    const std::string m = mode ? mode : "per-dataset";
    if (m != "per-dataset" && m != "pooled") {
      throw hf::Error(hf::ErrorCode::kInvalidArgument, "mode must be per-dataset or pooled");
    }
    const auto avg = m == "pooled" ? hf::AverageMode::kPooled : hf::AverageMode::kPerDataset;
    *out_json = dup_string(hf::combine_reports(paths, avg, force != 0).dump(2));
  });
}

hf_status hf_format_grid(const char* report_json, char** out_text) {
  return guarded([&] {
    require(report_json, "report_json");
    require(out_text, "out_text");
    *out_text = dup_string(hf::format_grid(json::parse(report_json)));
  });
}

}  // extern "C"
