#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "honeyfilter/config.hpp"
#include "honeyfilter/corpus.hpp"

namespace honeyfilter {

// digest(salt, password) -> stored string.
using DigestFn = std::function<std::string(std::string_view, std::string_view)>;

// Placeholder salted digest: hex FNV-1a 64 of salt + '\0' + password. Not a
// password hash; the simulation works on recovered plaintext anyway.
std::string placeholder_digest(std::string_view salt, std::string_view password);

struct VaultConfig {
  std::size_t th1 = 3;     // honeyword hits before an account is flagged
  std::size_t th2 = 1000;  // honeyword hits before the system alarm
  HashMode hash = HashMode::kPlain;
  bool fail_counts = false;  // non-sweetword attempts also count toward th1
  std::uint64_t salt_seed = 0;
  DigestFn digest;  // null selects placeholder_digest

  void validate() const;
};

VaultConfig vault_config_from(const RunConfig& config);

// What the web server keeps: sweetwords (or digests), no real index.
struct StoredAccount {
  std::int64_t account_id = 0;
  std::string salt;
  std::vector<std::string> entries;
};

enum class LoginOutcome { kSuccess, kHoneywordAlarm, kFail };

const char* login_outcome_name(LoginOutcome outcome);

class Vault {
 public:
  // Throws kInvalidArgument for duplicate account ids.
  static Vault build(const std::vector<SweetwordSet>& accounts, VaultConfig config);

  // Sweetword store and honey-checker store as separate JSON-lines files.
  void save(const std::filesystem::path& store_path,
            const std::filesystem::path& checker_path) const;
  static Vault load(const std::filesystem::path& store_path,
                    const std::filesystem::path& checker_path, VaultConfig config);
  void write_store(std::ostream& out) const;
  void write_checker(std::ostream& out) const;
  static Vault read(std::istream& store, std::istream& checker, VaultConfig config);

  // Throws kUnknownAccount.
  LoginOutcome check_login(std::int64_t account_id, std::string_view submitted);

  const VaultConfig& config() const { return config_; }
  std::size_t size() const { return store_.size(); }
  const StoredAccount& stored(std::int64_t account_id) const;
  std::size_t account_counter(std::int64_t account_id) const;
  bool account_flagged(std::int64_t account_id) const;
  std::size_t system_counter() const { return system_counter_; }
  bool system_flagged() const { return system_flagged_; }
  // Clears counters and flags.
  void reset();

 private:
  struct State {
    std::size_t counter = 0;
    bool flagged = false;
  };

  std::string stored_form(const StoredAccount& account, std::string_view password) const;

  VaultConfig config_;
  std::map<std::int64_t, StoredAccount> store_;
  std::map<std::int64_t, std::size_t> checker_;
  std::map<std::int64_t, State> state_;
  std::size_t system_counter_ = 0;
  bool system_flagged_ = false;
};

struct ReplayRow {
  std::int64_t account_id = 0;
  std::size_t attempt = 0;  // 1-based
  LoginOutcome outcome = LoginOutcome::kFail;
};

struct ReplayResult {
  std::size_t attempts = 0;
  std::size_t n_accounts = 0;
  std::size_t breached = 0;  // success before the account was flagged
  std::size_t breached_before_system_alarm = 0;
  std::size_t flagged_accounts = 0;
  bool system_alarm = false;
  std::vector<ReplayRow> transcript;

  double breached_fraction() const;
  // account,attempt,outcome
  std::string transcript_csv() const;
};

// For each account submits the sweetwords in `rankings[i]` order, at most
// `attempts` of them, stopping at success or once the account is flagged.
ReplayResult replay_attack(Vault& vault, const std::vector<SweetwordSet>& accounts,
                           const std::vector<std::vector<std::size_t>>& rankings,
                           std::size_t attempts);

}  // namespace honeyfilter
