#include "honeyfilter/vault.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "honeyfilter/error.hpp"
#include "honeyfilter/rng.hpp"

namespace honeyfilter {

using nlohmann::json;

std::string placeholder_digest(std::string_view salt, std::string_view password) {
  std::string buf;
  buf.reserve(salt.size() + 1 + password.size());
  buf.append(salt);
  buf.push_back('\0');
  buf.append(password);
  return hash_hex(fnv1a64(buf));
}

void VaultConfig::validate() const {
  if (th1 < 1) throw Error(ErrorCode::kInvalidArgument, "th1 must be >= 1");
  if (th2 < th1) throw Error(ErrorCode::kInvalidArgument, "th2 must be >= th1");
}

VaultConfig vault_config_from(const RunConfig& config) {
  VaultConfig v;
  v.th1 = config.vault.th1;
  v.th2 = config.vault.th2;
  v.hash = config.vault.hash;
  v.fail_counts = config.vault.fail_counts;
  v.salt_seed = config.stage_seed("vault");
  return v;
}

const char* login_outcome_name(LoginOutcome outcome) {
  switch (outcome) {
    case LoginOutcome::kSuccess: return "success";
    case LoginOutcome::kHoneywordAlarm: return "honeyword_alarm";
    case LoginOutcome::kFail: return "fail";
  }
  return "unknown";
}

std::string Vault::stored_form(const StoredAccount& account, std::string_view password) const {
  if (config_.hash == HashMode::kPlain) return std::string(password);
  return config_.digest ? config_.digest(account.salt, password)
                        : placeholder_digest(account.salt, password);
}

Vault Vault::build(const std::vector<SweetwordSet>& accounts, VaultConfig config) {
  config.validate();
  Vault v;
  v.config_ = std::move(config);
  for (const auto& a : accounts) {
    if (v.store_.count(a.account_id)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate account_id " + std::to_string(a.account_id));
    }
    if (a.real_index >= a.k()) {
      throw Error(ErrorCode::kInvalidArgument, "real_index out of range");
    }
    StoredAccount s;
    s.account_id = a.account_id;
    if (v.config_.hash == HashMode::kSaltedDigest) {
      s.salt = hash_hex(derive_seed(v.config_.salt_seed, static_cast<std::uint64_t>(a.account_id)));
    }
    for (const auto& w : a.sweetwords) s.entries.push_back(v.stored_form(s, w));
    v.store_.emplace(a.account_id, std::move(s));
    v.checker_.emplace(a.account_id, a.real_index);
  }
  return v;
}

void Vault::write_store(std::ostream& out) const {
  const char* mode = config_.hash == HashMode::kPlain ? "plain" : "salted";
  for (const auto& [id, s] : store_) {
    json line = {{"account_id", id}, {"hash", mode}, {"salt", s.salt}, {"sweetwords", s.entries}};
    out << line.dump() << '\n';
  }
}

void Vault::write_checker(std::ostream& out) const {
  for (const auto& [id, index] : checker_) {
    out << json{{"account_id", id}, {"real_index", index}}.dump() << '\n';
  }
}

void Vault::save(const std::filesystem::path& store_path,
                 const std::filesystem::path& checker_path) const {
  std::ofstream store(store_path);
  std::ofstream checker(checker_path);
  if (!store || !checker) throw Error(ErrorCode::kIo, "cannot write vault files");
  write_store(store);
  write_checker(checker);
  if (!store || !checker) throw Error(ErrorCode::kIo, "vault write failed");
}

Vault Vault::read(std::istream& store, std::istream& checker, VaultConfig config) {
  config.validate();
  Vault v;
  v.config_ = std::move(config);
  const std::string expected = v.config_.hash == HashMode::kPlain ? "plain" : "salted";
  std::string line;
  try {
    while (std::getline(store, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      if (j.at("hash").get<std::string>() != expected) {
        throw Error(ErrorCode::kParse, "store hash mode differs from the vault config");
      }
      StoredAccount s;
      s.account_id = j.at("account_id").get<std::int64_t>();
      s.salt = j.at("salt").get<std::string>();
      s.entries = j.at("sweetwords").get<std::vector<std::string>>();
      if (!v.store_.emplace(s.account_id, s).second) {
        throw Error(ErrorCode::kInvalidArgument,
                    "duplicate account_id " + std::to_string(s.account_id));
      }
    }
    while (std::getline(checker, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      const auto id = j.at("account_id").get<std::int64_t>();
      const auto index = j.at("real_index").get<std::size_t>();
      auto it = v.store_.find(id);
      if (it == v.store_.end() || index >= it->second.entries.size()) {
        throw Error(ErrorCode::kParse, "checker entry " + std::to_string(id) +
                                           " does not match the store");
      }
      v.checker_[id] = index;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad vault line: ") + e.what());
  }
  if (v.checker_.size() != v.store_.size()) {
    throw Error(ErrorCode::kParse, "checker and store cover different accounts");
  }
  return v;
}

Vault Vault::load(const std::filesystem::path& store_path,
                  const std::filesystem::path& checker_path, VaultConfig config) {
  std::ifstream store(store_path);
  std::ifstream checker(checker_path);
  if (!store) throw Error(ErrorCode::kIo, "cannot open " + store_path.string());
  if (!checker) throw Error(ErrorCode::kIo, "cannot open " + checker_path.string());
  return read(store, checker, std::move(config));
}

const StoredAccount& Vault::stored(std::int64_t account_id) const {
  auto it = store_.find(account_id);
  if (it == store_.end()) {
    throw Error(ErrorCode::kUnknownAccount, "unknown account " + std::to_string(account_id));
  }
  return it->second;
}

LoginOutcome Vault::check_login(std::int64_t account_id, std::string_view submitted) {
  const StoredAccount& account = stored(account_id);
  const std::string form = stored_form(account, submitted);
  std::size_t match = account.entries.size();
  for (std::size_t i = 0; i < account.entries.size(); ++i) {
    if (account.entries[i] == form) {
      match = i;
      break;
    }
  }
  if (match == checker_.at(account_id)) return LoginOutcome::kSuccess;

  State& state = state_[account_id];
  const bool honeyword = match < account.entries.size();
  if (honeyword || config_.fail_counts) {
    ++state.counter;
    if (state.counter >= config_.th1) state.flagged = true;
  }
  if (honeyword) {
    ++system_counter_;
    if (system_counter_ >= config_.th2) system_flagged_ = true;
    return LoginOutcome::kHoneywordAlarm;
  }
  return LoginOutcome::kFail;
}

std::size_t Vault::account_counter(std::int64_t account_id) const {
  stored(account_id);
  auto it = state_.find(account_id);
  return it == state_.end() ? 0 : it->second.counter;
}

bool Vault::account_flagged(std::int64_t account_id) const {
  stored(account_id);
  auto it = state_.find(account_id);
  return it != state_.end() && it->second.flagged;
}

void Vault::reset() {
  state_.clear();
  system_counter_ = 0;
  system_flagged_ = false;
}

double ReplayResult::breached_fraction() const {
  return n_accounts ? static_cast<double>(breached) / static_cast<double>(n_accounts) : 0.0;
}

std::string ReplayResult::transcript_csv() const {
  std::ostringstream out;
  out << "account,attempt,outcome\n";
  for (const auto& r : transcript) {
    out << r.account_id << ',' << r.attempt << ',' << login_outcome_name(r.outcome) << '\n';
  }
  return out.str();
}

ReplayResult replay_attack(Vault& vault, const std::vector<SweetwordSet>& accounts,
                           const std::vector<std::vector<std::size_t>>& rankings,
                           std::size_t attempts) {
  if (rankings.size() != accounts.size()) {
    throw Error(ErrorCode::kInvalidArgument, "one ranking per account required");
  }
  ReplayResult result;
  result.attempts = attempts;
  result.n_accounts = accounts.size();
  for (std::size_t i = 0; i < accounts.size(); ++i) {
    const auto& account = accounts[i];
    const std::size_t budget = std::min(attempts, rankings[i].size());
    for (std::size_t a = 0; a < budget; ++a) {
      if (vault.account_flagged(account.account_id)) break;
      const bool system_quiet = !vault.system_flagged();
      const auto outcome =
          vault.check_login(account.account_id, account.sweetwords.at(rankings[i][a]));
      result.transcript.push_back({account.account_id, a + 1, outcome});
      if (outcome == LoginOutcome::kSuccess) {
        ++result.breached;
        if (system_quiet) ++result.breached_before_system_alarm;
        break;
      }
    }
    if (vault.account_flagged(account.account_id)) ++result.flagged_accounts;
  }
  result.system_alarm = vault.system_flagged();
  return result;
}

}  // namespace honeyfilter
