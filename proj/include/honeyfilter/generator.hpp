#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace honeyfilter {

enum class GeneratorKind { kTweak, kPasswordModel, kHybrid, kImported };

const char* generator_kind_name(GeneratorKind kind);

// Common interface of every honeyword generation technique.
//
// `stream` selects an independent random stream for this call; callers pass
// a per-password index (or any derived value) so that results do not depend
// on the order in which passwords are processed. Generators are reentrant.
class HoneywordGenerator {
 public:
  virtual ~HoneywordGenerator() = default;

  virtual GeneratorKind kind() const = 0;

  // Returns `count` pairwise-distinct honeywords, none equal to `password`.
  // Throws honeyfilter::Error when that is impossible.
  virtual std::vector<std::string> generate(std::string_view password,
                                            std::size_t count,
                                            std::uint64_t stream) const = 0;
};

}  // namespace honeyfilter
