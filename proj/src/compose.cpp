#include "honeyfilter/compose.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "honeyfilter/corpus.hpp"
#include "honeyfilter/error.hpp"

namespace honeyfilter {

const char* generator_kind_name(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::kTweak: return "tweak";
    case GeneratorKind::kPasswordModel: return "model";
    case GeneratorKind::kHybrid: return "hybrid";
    case GeneratorKind::kImported: return "import";
  }
  return "unknown";
}

std::vector<std::string> generate_password_model(std::string_view password,
                                                 const EmbeddingModel& model,
                                                 std::size_t count) {
  if (count < 1) throw Error(ErrorCode::kInvalidArgument, "count must be >= 1");
  std::vector<std::string> out;
  out.reserve(count);
  for (auto& n : model.nearest(password, count)) out.push_back(std::move(n.word));
  return out;
}

std::vector<std::string> generate_hybrid(std::string_view password,
                                         const EmbeddingModel& model,
                                         const TweakParams& tweak,
                                         std::size_t count) {
  const auto predictions = generate_password_model(password, model, count);
  TweakSession session(tweak, tweak.attempts_per_word * count);
  std::vector<std::string> out;
  std::unordered_set<std::string> taken;
  out.reserve(count);
  for (const auto& base : predictions) {
    auto word = session.next_distinct(base, password, taken);
    taken.insert(word);
    out.push_back(std::move(word));
  }
  return out;
}

PasswordModelGenerator::PasswordModelGenerator(std::shared_ptr<const EmbeddingModel> model)
    : model_(std::move(model)) {
  if (!model_) throw Error(ErrorCode::kInvalidArgument, "null embedding model");
}

std::vector<std::string> PasswordModelGenerator::generate(std::string_view password,
                                                          std::size_t count,
                                                          std::uint64_t) const {
  return generate_password_model(password, *model_, count);
}

HybridGenerator::HybridGenerator(std::shared_ptr<const EmbeddingModel> model,
                                 TweakParams tweak)
    : model_(std::move(model)), tweak_(tweak) {
  if (!model_) throw Error(ErrorCode::kInvalidArgument, "null embedding model");
  tweak_.validate();
}

std::vector<std::string> HybridGenerator::generate(std::string_view password,
                                                   std::size_t count,
                                                   std::uint64_t stream) const {
  TweakParams tweak = tweak_;
  tweak.rng_seed = derive_seed(tweak_.rng_seed, stream);
  return generate_hybrid(password, *model_, tweak, count);
}

ImportedHoneywordTable import_honeywords(std::istream& in, std::string provenance) {
  ImportedHoneywordTable table;
  table.provenance = std::move(provenance);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    bool ok = fields.size() >= 2 && !fields[0].empty();
    for (std::size_t i = 1; ok && i < fields.size(); ++i) {
      ok = !fields[i].empty() && fields[i] != fields[0];
    }
    if (!ok) {
      ++table.malformed_rows;
      continue;
    }
    auto& list = table.rows[fields[0]];
    list.insert(list.end(), std::make_move_iterator(fields.begin() + 1),
                std::make_move_iterator(fields.end()));
  }
  if (table.rows.empty()) {
    throw Error(ErrorCode::kParse, "honeyword table '" + table.provenance +
                                       "' has no valid rows");
  }
  return table;
}

ImportedHoneywordTable import_honeywords(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open honeyword table " + path.string());
  return import_honeywords(in, path.filename().string());
}

void write_honeyword_row(std::ostream& out, std::string_view password,
                         const std::vector<std::string>& honeywords) {
  out << password;
  for (const auto& h : honeywords) out << '\t' << h;
  out << '\n';
}

ImportedGenerator::ImportedGenerator(std::shared_ptr<const ImportedHoneywordTable> table)
    : table_(std::move(table)) {
  if (!table_) throw Error(ErrorCode::kInvalidArgument, "null honeyword table");
}

std::vector<std::string> ImportedGenerator::generate(std::string_view password,
                                                     std::size_t count,
                                                     std::uint64_t) const {
  const auto it = table_->rows.find(std::string(password));
  if (it == table_->rows.end()) {
    throw Error(ErrorCode::kVocabExhausted, "no imported honeywords for password");
  }
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& h : it->second) {
    if (out.size() == count) break;
    if (h != password && seen.insert(h).second) out.push_back(h);
  }
  if (out.size() < count) {
    throw Error(ErrorCode::kVocabExhausted,
                "imported table has " + std::to_string(out.size()) +
                    " distinct honeywords, " + std::to_string(count) + " requested");
  }
  return out;
}

}  // namespace honeyfilter
