#include <doctest.h>

#include <atomic>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "honeyfilter/compose.hpp"
#include "honeyfilter/error.hpp"
#include "honeyfilter/llm.hpp"
#include "test_support.hpp"

using namespace honeyfilter;

namespace {

std::shared_ptr<const EmbeddingModel> small_model() {
  static auto model = [] {
    EmbedHyper h;
    h.dim = 16;
    h.epochs = 2;
    h.buckets = 1 << 15;
    h.seed = 3;
    return std::make_shared<const EmbeddingModel>(
        train_embedding(testing::fixture_corpus(2000), h));
  }();
  return model;
}

// Serves canned completions on a loopback port and records prompts.
class FakeLlm {
 public:
  explicit FakeLlm(std::string reply) : reply_(std::move(reply)) {
    server_.Post("/v1/complete", [this](const httplib::Request& req, httplib::Response& res) {
      auto body = nlohmann::json::parse(req.body);
      {
        std::lock_guard lock(mu_);
        prompts_.push_back(body.at("prompt").get<std::string>());
      }
      ++hits_;
      if (hits_ <= fail_first_) {
        res.status = 503;
        return;
      }
      res.set_content(nlohmann::json{{"completions", {reply_}}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeLlm() {
    server_.stop();
    thread_.join();
  }
  LlmEndpoint endpoint() const {
    LlmEndpoint e;
    e.url = "http://127.0.0.1:" + std::to_string(port_) + "/v1/complete";
    e.model = "fake";
    e.backoff = std::chrono::milliseconds(1);
    e.timeout_seconds = 5;
    return e;
  }
  std::vector<std::string> prompts() {
    std::lock_guard lock(mu_);
    return prompts_;
  }
  int hits() const { return hits_; }
  int fail_first_ = 0;

 private:
  std::string reply_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::mutex mu_;
  std::vector<std::string> prompts_;
  std::atomic<int> hits_{0};
};

}  // namespace

TEST_SUITE("compose") {
  TEST_CASE("password model returns nearest neighbours") {
    auto model = small_model();
    auto out = generate_password_model("password1", *model, 19);
    REQUIRE(out.size() == 19);
    auto nn = model->nearest("password1", 19);
    for (std::size_t i = 0; i < 19; ++i) CHECK(out[i] == nn[i].word);
    CHECK(std::set<std::string>(out.begin(), out.end()).size() == 19);
    CHECK_THROWS_AS(generate_password_model("password1", *model, model->vocab_size() + 1), Error);
  }

  TEST_CASE("hybrid with null tweak equals the model") {
    auto model = small_model();
    HybridGenerator hybrid(model, TweakParams::zero());
    PasswordModelGenerator plain(model);
    for (std::string pw : {"password1", "dragon2000", "Xy!9kLm2"}) {
      CHECK(hybrid.generate(pw, 19, 0) == plain.generate(pw, 19, 0));
    }
  }

  TEST_CASE("hybrid output is distinct and excludes the password") {
    auto model = small_model();
    HybridGenerator hybrid(model, TweakParams{});
    auto out = hybrid.generate("monkey123", 19, 2);
    std::set<std::string> distinct(out.begin(), out.end());
    CHECK(distinct.size() == 19);
    CHECK(!distinct.contains("monkey123"));
    CHECK(hybrid.generate("monkey123", 19, 2) == out);
  }

  TEST_CASE("import table") {
    std::istringstream in(
        "sony1711\tsony1234\tsonyboy\tsonata11\tsonic1711\tsony17\tsunny1711\tsonny\tsony7171\n"
        "abc12345\t\tabc12346\n"
        "lonely99\n"
        "same1234\tsame1234\n"
        "repeat11\trepeat12\trepeat13\n"
        "repeat11\trepeat14\trepeat12\n");
    auto table = import_honeywords(in, "inline");
    CHECK(table.malformed_rows == 3);
    REQUIRE(table.rows.contains("sony1711"));
    CHECK(table.rows["sony1711"].size() == 8);
    CHECK(table.rows["repeat11"] ==
          std::vector<std::string>{"repeat12", "repeat13", "repeat14", "repeat12"});

    ImportedGenerator gen(std::make_shared<const ImportedHoneywordTable>(table));
    CHECK(gen.generate("sony1711", 8, 0).front() == "sony1234");
    CHECK(gen.generate("repeat11", 3, 0) ==
          std::vector<std::string>{"repeat12", "repeat13", "repeat14"});
    CHECK_THROWS_AS(gen.generate("sony1711", 9, 0), Error);
    CHECK_THROWS_AS(gen.generate("missing1", 1, 0), Error);

    std::ostringstream out;
    write_honeyword_row(out, "sony1711", {"a1", "b2"});
    CHECK(out.str() == "sony1711\ta1\tb2\n");
  }

  TEST_CASE("chunks and prompt") {
    CHECK(chunk_password("sony1711") == std::vector<std::string>{"sony", "1711"});
    CHECK(chunk_password("ab!!12cd") == std::vector<std::string>{"ab", "!!", "12", "cd"});
    auto prompt = build_prompt(kDefaultHoneyChunkPrompt, "sony1711", chunk_password("sony1711"));
    CHECK(prompt.find("sony1711") != std::string::npos);
    CHECK(prompt.find("sony, 1711") != std::string::npos);
    CHECK(prompt.find("at most 8 characters") != std::string::npos);
    CHECK(prompt.find('{') == std::string::npos);
  }

  TEST_CASE("completion parsing") {
    auto words = parse_completion("1. sonya\n2) \"sonny\"\n- sony1711\n* two words\n\nsonya\n", "sony1711");
    CHECK(words == std::vector<std::string>{"sonya", "sonny"});
    try {
      parse_completion("I cannot help with that request.", "sony1711");
      FAIL("expected refusal");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kRefusal);
    }
  }

  TEST_CASE("llm client against a local endpoint") {
    FakeLlm server("sonyboy\nsonata\nsonic");
    server.fail_first_ = 1;
    auto dir = testing::scratch_dir("llm_cache");
    auto words = fetch_llm_honeywords("sony1711", server.endpoint(), dir / "cache.tsv");
    CHECK(words == std::vector<std::string>{"sonyboy", "sonata", "sonic"});
    CHECK(server.hits() == 2);
    auto prompts = server.prompts();
    REQUIRE(!prompts.empty());
    CHECK(prompts.back().find("at most 8 characters") != std::string::npos);
    CHECK(testing::read_file(dir / "cache.tsv") == "sony1711\tsonyboy\tsonata\tsonic\n");
  }

  TEST_CASE("llm refusal surfaces") {
    FakeLlm server("Sorry, I can't do that.");
    try {
      fetch_llm_honeywords("sony1711", server.endpoint());
      FAIL("expected refusal");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kRefusal);
    }
  }

  TEST_CASE("llm endpoint errors") {
    LlmEndpoint e;
    e.url = "https://example.invalid/x";
    CHECK_THROWS_AS(LlmClient{e}, Error);
    e.url = "http://127.0.0.1:1/none";
    e.max_retries = 1;
    e.backoff = std::chrono::milliseconds(1);
    e.timeout_seconds = 1;
    try {
      fetch_llm_honeywords("sony1711", e);
      FAIL("expected network error");
    } catch (const Error& err) {
      CHECK(err.code() == ErrorCode::kNetwork);
    }
  }
}
