#include <cctype>
#include <cstdlib>
#include <fstream>
#include <thread>
#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

#include "honeyfilter/compose.hpp"
#include "honeyfilter/error.hpp"
#include "honeyfilter/llm.hpp"
#include "honeyfilter/utf8.hpp"

namespace honeyfilter {

const char* const kDefaultHoneyChunkPrompt =
    "List 20 words that resemble {password} and include the pieces {chunks}. "
    "When the input is not a recognizable word, produce words that look like it. "
    "The outputs are ordinary words, not passwords. Each word has at most {length} "
    "characters. Do not append digits.";

namespace {

enum class CharClass { kLetter, kDigit, kOther };

CharClass classify(char32_t c) {
  if ((c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z')) return CharClass::kLetter;
  if (c >= U'0' && c <= U'9') return CharClass::kDigit;
  return CharClass::kOther;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos;
       pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

struct ParsedUrl {
  std::string origin;  // scheme://host:port
  std::string path;
};

ParsedUrl parse_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "endpoint URL needs a scheme: " + url);
  }
  if (url.compare(0, scheme_end, "http") != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "only http:// endpoints are supported (got " + url + ")");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::vector<std::string> chunk_password(std::string_view password) {
  const auto chars = utf8::decode_lossy(password);
  std::vector<std::string> chunks;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= chars.size(); ++i) {
    if (i == chars.size() || classify(chars[i]) != classify(chars[start])) {
      chunks.push_back(utf8::encode(std::u32string_view(chars).substr(start, i - start)));
      start = i;
    }
  }
  return chunks;
}

std::string build_prompt(std::string_view templ, std::string_view password,
                         const std::vector<std::string>& chunks) {
  std::string joined;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    if (i) joined += ", ";
    joined += chunks[i];
  }
  std::string prompt(templ);
  replace_all(prompt, "{password}", password);
  replace_all(prompt, "{chunks}", joined);
  replace_all(prompt, "{length}", std::to_string(utf8::length(password)));
  return prompt;
}

std::vector<std::string> parse_completion(std::string_view text,
                                          std::string_view password) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(start, end - start));
    start = end + 1;

    // List markers: "12." / "12)" / "-" / "*" / "•".
    std::size_t digits = 0;
    while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits]))) ++digits;
    if (digits > 0 && digits < line.size() && (line[digits] == '.' || line[digits] == ')')) {
      line = trim(line.substr(digits + 1));
    } else if (!line.empty() && (line.front() == '-' || line.front() == '*')) {
      line = trim(line.substr(1));
    } else if (line.starts_with("•")) {
      line = trim(line.substr(3));
    }
    while (line.size() >= 2 && (line.front() == '"' || line.front() == '\'') &&
           line.back() == line.front()) {
      line = line.substr(1, line.size() - 2);
    }
    if (!line.empty() && line.back() == ',') line.remove_suffix(1);
    if (line.empty() || line == password) continue;
    if (line.find_first_of(" \t") != std::string_view::npos) continue;
    if (!utf8::is_valid(line)) continue;
    std::string word(line);
    if (seen.insert(word).second) out.push_back(std::move(word));
  }
  if (out.empty()) {
    throw Error(ErrorCode::kRefusal,
                "completion contained no candidate honeywords: " + std::string(text));
  }
  return out;
}

LlmClient::LlmClient(LlmEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  parse_url(endpoint_.url);
}

std::string LlmClient::complete(const std::string& prompt) {
  std::lock_guard lock(mutex_);
  const auto url = parse_url(endpoint_.url);

  nlohmann::json body = {{"model", endpoint_.model}, {"prompt", prompt}};
  httplib::Headers headers;
  if (!endpoint_.auth_env.empty()) {
    if (const char* token = std::getenv(endpoint_.auth_env.c_str()); token && *token) {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
  }

  std::string last_failure;
  auto delay = endpoint_.backoff;
  for (int attempt = 0; attempt <= endpoint_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
    const auto since = std::chrono::steady_clock::now() - last_request_;
    if (since < endpoint_.min_interval) std::this_thread::sleep_for(endpoint_.min_interval - since);
    last_request_ = std::chrono::steady_clock::now();

    httplib::Client client(url.origin);
    client.set_connection_timeout(endpoint_.timeout_seconds, 0);
    client.set_read_timeout(endpoint_.timeout_seconds, 0);
    auto res = client.Post(url.path, headers, body.dump(), "application/json");
    if (!res) {
      last_failure = "request failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 401 || res->status == 403) {
      throw Error(ErrorCode::kNetwork,
                  "endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")");
    }
    if (res->status != 200) {
      last_failure = "HTTP " + std::to_string(res->status);
      continue;
    }
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, std::string("endpoint reply is not JSON: ") + e.what());
    }
    std::string text;
    auto append = [&text](const std::string& s) {
      if (!text.empty()) text += '\n';
      text += s;
    };
    if (reply.contains("completions") && reply["completions"].is_array()) {
      for (const auto& c : reply["completions"]) {
        if (c.is_string()) append(c.get<std::string>());
      }
    } else if (reply.contains("choices") && reply["choices"].is_array()) {
      for (const auto& c : reply["choices"]) {
        if (c.contains("text") && c["text"].is_string()) append(c["text"].get<std::string>());
      }
    } else if (reply.contains("text") && reply["text"].is_string()) {
      append(reply["text"].get<std::string>());
    } else {
      throw Error(ErrorCode::kParse, "endpoint reply has no completions: " + res->body);
    }
    return text;
  }
  throw Error(ErrorCode::kNetwork, "LLM endpoint unavailable after retries: " + last_failure);
}

std::vector<std::string> LlmClient::fetch_honeywords(std::string_view password,
                                                     const std::filesystem::path& cache) {
  const auto prompt =
      build_prompt(endpoint_.prompt_template, password, chunk_password(password));
  auto honeywords = parse_completion(complete(prompt), password);
  if (!cache.empty()) {
    std::ofstream out(cache, std::ios::binary | std::ios::app);
    if (!out) throw Error(ErrorCode::kIo, "cannot append to " + cache.string());
    write_honeyword_row(out, password, honeywords);
  }
  return honeywords;
}

std::vector<std::string> fetch_llm_honeywords(std::string_view password,
                                              const LlmEndpoint& endpoint,
                                              const std::filesystem::path& cache) {
  LlmClient client(endpoint);
  return client.fetch_honeywords(password, cache);
}

}  // namespace honeyfilter
