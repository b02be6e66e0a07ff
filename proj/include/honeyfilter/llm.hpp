#pragma once

#include <chrono>
#include <filesystem>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace honeyfilter {

// Maximal runs of letters, digits, or other characters: "sony1711" ->
// {"sony", "1711"}.
std::vector<std::string> chunk_password(std::string_view password);

// Default prompt. Placeholders: {password}, {chunks} (comma-separated),
// {length} (password length in characters).
extern const char* const kDefaultHoneyChunkPrompt;

std::string build_prompt(std::string_view templ, std::string_view password,
                         const std::vector<std::string>& chunks);

struct LlmEndpoint {
  std::string url;  // http://host[:port]/path
  std::string model;
  std::string auth_env = "HONEYFILTER_LLM_TOKEN";  // bearer token variable
  std::string prompt_template = kDefaultHoneyChunkPrompt;
  int max_retries = 3;
  std::chrono::milliseconds backoff{500};
  std::chrono::milliseconds min_interval{0};
  int timeout_seconds = 30;
};

// Extracts candidate honeywords from completion text: one per line, list
// markers ("1.", "2)", "-", "*") and surrounding quotes stripped, lines with
// inner whitespace dropped, duplicates and `password` removed. Throws
// Error(kRefusal) carrying the raw text when nothing remains.
std::vector<std::string> parse_completion(std::string_view text,
                                          std::string_view password);

// Plain JSON-over-HTTP completion client. Request body:
//   {"model": <model>, "prompt": <prompt>}
// Accepted responses: {"completions": [str...]}, {"choices": [{"text": str}]}
// or {"text": str}. Requests are serialized and spaced by min_interval.
class LlmClient {
 public:
  explicit LlmClient(LlmEndpoint endpoint);

  std::string complete(const std::string& prompt);

  // Prompts with the password and its chunks, parses the completion and, if
  // `cache` is non-empty, appends the row to that honeyword table file.
  std::vector<std::string> fetch_honeywords(std::string_view password,
                                            const std::filesystem::path& cache = {});

 private:
  LlmEndpoint endpoint_;
  std::mutex mutex_;
  std::chrono::steady_clock::time_point last_request_{};
};

std::vector<std::string> fetch_llm_honeywords(std::string_view password,
                                              const LlmEndpoint& endpoint,
                                              const std::filesystem::path& cache = {});

}  // namespace honeyfilter
