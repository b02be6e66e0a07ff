#include "honeyfilter/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>

#include "honeyfilter/error.hpp"
#include "honeyfilter/rng.hpp"
#include "honeyfilter/utf8.hpp"

namespace honeyfilter {

PasswordCorpus load_passwords(std::istream& in, std::size_t min_len,
                              std::string source_tag) {
  if (min_len < 1) {
    throw Error(ErrorCode::kInvalidArgument, "min_len must be >= 1");
  }
  PasswordCorpus corpus;
  corpus.source_tag = std::move(source_tag);
  corpus.min_len = min_len;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto decoded = utf8::decode(line);
    if (!decoded) {
      ++corpus.skipped_invalid_utf8;
      continue;
    }
    if (decoded->size() < min_len) {
      ++corpus.dropped_short;
      continue;
    }
    corpus.entries.push_back(std::move(line));
  }
  if (corpus.entries.empty()) {
    throw Error(ErrorCode::kEmptyCorpus,
                "no passwords of length >= " + std::to_string(min_len) +
                    " in '" + corpus.source_tag + "'");
  }
  return corpus;
}

PasswordCorpus load_passwords(const std::filesystem::path& path,
                              std::size_t min_len) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open password file: " + path.string());
  }
  return load_passwords(in, min_len, path.stem().string());
}

Alphabet::Alphabet(std::vector<char32_t> chars) : chars_(std::move(chars)) {
  std::sort(chars_.begin(), chars_.end());
  chars_.erase(std::unique(chars_.begin(), chars_.end()), chars_.end());
  index_.reserve(chars_.size());
  for (std::size_t i = 0; i < chars_.size(); ++i) {
    index_.emplace(chars_[i], static_cast<std::int32_t>(i + 2));
  }
}

std::int32_t Alphabet::id(char32_t c) const {
  const auto it = index_.find(c);
  return it == index_.end() ? kUnknown : it->second;
}

char32_t Alphabet::character(std::int32_t id) const {
  if (id < 2 || static_cast<std::size_t>(id) >= size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "token id " + std::to_string(id) + " has no character");
  }
  return chars_[static_cast<std::size_t>(id - 2)];
}

Alphabet build_alphabet(const std::vector<std::string>& words) {
  std::set<char32_t> seen;
  for (const auto& w : words) {
    for (char32_t c : utf8::decode_lossy(w)) seen.insert(c);
  }
  return Alphabet(std::vector<char32_t>(seen.begin(), seen.end()));
}

Alphabet build_alphabet(const PasswordCorpus& corpus) {
  return build_alphabet(corpus.entries);
}

TokenSeq tokenize(std::string_view word, const Alphabet& alphabet,
                  std::size_t max_len) {
  if (max_len < 1) throw Error(ErrorCode::kInvalidArgument, "max_len must be >= 1");
  const auto chars = utf8::decode_lossy(word);
  TokenSeq seq;
  seq.max_len = max_len;
  seq.length = std::min(chars.size(), max_len);
  seq.ids.assign(max_len, Alphabet::kPad);
  for (std::size_t i = 0; i < seq.length; ++i) seq.ids[i] = alphabet.id(chars[i]);
  return seq;
}

std::string detokenize(const TokenSeq& seq, const Alphabet& alphabet) {
  std::u32string chars;
  for (std::size_t i = 0; i < seq.length; ++i) {
    const auto id = seq.ids[i];
    chars.push_back(id >= 2 ? alphabet.character(id) : U'�');
  }
  return utf8::encode(chars);
}

void SplitSpec::validate() const {
  for (double f : {train_frac, val_frac, test_frac}) {
    if (!(f > 0.0) || f > 1.0) {
      throw Error(ErrorCode::kInvalidArgument, "split fractions must lie in (0, 1]");
    }
  }
  if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "split fractions must sum to 1");
  }
}

CorpusSplit split(const PasswordCorpus& corpus, const SplitSpec& spec) {
  spec.validate();
  const std::size_t n = corpus.size();
  if (n < 3) throw Error(ErrorCode::kInvalidArgument, "split needs at least 3 entries");

  std::vector<std::string> shuffled = corpus.entries;
  Rng rng(spec.seed);
  rng.shuffle(std::span<std::string>(shuffled));

  const auto n_train = static_cast<std::size_t>(std::llround(n * spec.train_frac));
  const auto n_val = std::min(n - n_train,
                              static_cast<std::size_t>(std::llround(n * spec.val_frac)));

  auto slice = [&](std::size_t from, std::size_t to) {
    PasswordCorpus part;
    part.source_tag = corpus.source_tag;
    part.min_len = corpus.min_len;
    part.entries.assign(std::make_move_iterator(shuffled.begin() + from),
                        std::make_move_iterator(shuffled.begin() + to));
    return part;
  };
  CorpusSplit out;
  out.train = slice(0, n_train);
  out.val = slice(n_train, n_train + n_val);
  out.test = slice(n_train + n_val, n);
  return out;
}

TrainingPairs build_training_pairs(const std::vector<std::string>& passwords,
                                   const HoneywordGenerator& generator) {
  TrainingPairs out;
  out.pairs.reserve(passwords.size() * 2);
  for (std::size_t i = 0; i < passwords.size(); ++i) {
    std::vector<std::string> honey;
    try {
      honey = generator.generate(passwords[i], 1, i);
    } catch (const Error&) {
      ++out.skipped;
      continue;
    }
    if (honey.empty()) {
      ++out.skipped;
      continue;
    }
    out.pairs.push_back({passwords[i], Label::kPassword});
    out.pairs.push_back({std::move(honey.front()), Label::kHoneyword});
  }
  return out;
}

EvalAccounts build_eval_accounts(
    const std::vector<std::string>& passwords,
    const HoneywordGenerator& generator, const EvalAccountOptions& options,
    const std::unordered_set<std::string>& exclusion) {
  if (options.k < 2) throw Error(ErrorCode::kInvalidArgument, "k must be >= 2");
  if (options.n_accounts > passwords.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "requested " + std::to_string(options.n_accounts) +
                    " accounts from " + std::to_string(passwords.size()) +
                    " passwords");
  }

  std::vector<std::size_t> order(passwords.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng pick(derive_seed(options.seed, "eval.sample"));
  pick.shuffle(std::span<std::size_t>(order));
  Rng place(derive_seed(options.seed, "eval.position"));
  const std::uint64_t stream_base = derive_seed(options.seed, "eval.generate");

  EvalAccounts out;
  for (std::size_t idx : order) {
    if (out.accounts.size() == options.n_accounts) break;
    const std::string& password = passwords[idx];
    if (exclusion.contains(password)) {
      ++out.excluded;
      continue;
    }
    std::vector<std::string> honey;
    bool filled = false;
    for (std::size_t attempt = 0; attempt <= options.retries && !filled; ++attempt) {
      try {
        honey = generator.generate(
            password, options.k - 1,
            derive_seed(stream_base, idx * (options.retries + 1) + attempt));
      } catch (const Error&) {
        continue;
      }
      std::unordered_set<std::string> distinct(honey.begin(), honey.end());
      filled = honey.size() == options.k - 1 && distinct.size() == honey.size() &&
               !distinct.contains(password);
    }
    if (!filled) {
      ++out.skipped;
      continue;
    }
    SweetwordSet set;
    set.account_id = static_cast<std::int64_t>(out.accounts.size());
    set.real_index = static_cast<std::size_t>(place.uniform_below(options.k));
    set.sweetwords = std::move(honey);
    set.sweetwords.insert(set.sweetwords.begin() + static_cast<std::ptrdiff_t>(set.real_index),
                          password);
    out.accounts.push_back(std::move(set));
  }
  return out;
}

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

void write_accounts_tsv(std::ostream& out,
                        const std::vector<SweetwordSet>& accounts) {
  for (const auto& a : accounts) {
    out << a.account_id << '\t' << a.real_index;
    for (const auto& w : a.sweetwords) out << '\t' << w;
    out << '\n';
  }
}

void write_accounts_tsv(const std::filesystem::path& path,
                        const std::vector<SweetwordSet>& accounts) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  write_accounts_tsv(out, accounts);
}

std::vector<SweetwordSet> read_accounts_tsv(std::istream& in) {
  std::vector<SweetwordSet> accounts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    auto fail = [&](const std::string& why) {
      return Error(ErrorCode::kParse,
                   "accounts line " + std::to_string(line_no) + ": " + why);
    };
    if (fields.size() < 4) throw fail("need account_id, real_index and >= 2 sweetwords");
    SweetwordSet set;
    try {
      set.account_id = std::stoll(fields[0]);
      set.real_index = std::stoull(fields[1]);
    } catch (const std::exception&) {
      throw fail("non-numeric id field");
    }
    set.sweetwords.assign(std::make_move_iterator(fields.begin() + 2),
                          std::make_move_iterator(fields.end()));
    if (set.real_index >= set.sweetwords.size()) throw fail("real_index out of range");
    accounts.push_back(std::move(set));
  }
  return accounts;
}

std::vector<SweetwordSet> read_accounts_tsv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return read_accounts_tsv(in);
}

}  // namespace honeyfilter
