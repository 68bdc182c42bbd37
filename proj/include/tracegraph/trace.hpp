#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tracegraph {

using UserId = std::uint32_t;
using Timestamp = std::int64_t;

/// One line of an activity log. `rid` is empty for original posts and holds
/// the pid of the original post for reposts.
struct PostRecord {
  std::string pid;
  Timestamp t = 0;
  std::string uid;
  std::optional<std::string> rid;

  bool is_original() const noexcept { return !rid.has_value(); }
  friend bool operator==(const PostRecord&, const PostRecord&) = default;
};

/// Time-ordered log of posts and reposts with a dense user index.
///
/// Records are kept stably sorted by timestamp, so records sharing a
/// timestamp stay in input order. Users are numbered in order of first
/// appearance in the sorted log.
class Trace {
 public:
  Trace() = default;

  /// Sorts, validates pid uniqueness and indexes users.
  /// Throws ValidationError on duplicate pid or rid == pid.
  static Trace from_records(std::vector<PostRecord> records);

  const std::vector<PostRecord>& records() const noexcept { return records_; }
  const std::vector<std::string>& users() const noexcept { return users_; }

  std::size_t post_count() const noexcept { return records_.size(); }  // T
  std::size_t original_count() const noexcept { return originals_; }  // S
  std::size_t user_count() const noexcept { return users_.size(); }    // N

  std::optional<UserId> user_id(std::string_view uid) const;

 private:
  std::vector<PostRecord> records_;
  std::vector<std::string> users_;
  std::unordered_map<std::string, UserId> user_index_;
  std::size_t originals_ = 0;
};

enum class Field { Pid, Time, Uid, Rid };

enum class Delimiter { Tab, Comma, Whitespace };

/// Column layout of a trace file. Defaults to tab-separated
/// `pid t uid rid`.
struct TraceFormat {
  Delimiter delimiter = Delimiter::Tab;
  std::array<Field, 4> order{Field::Pid, Field::Time, Field::Uid, Field::Rid};

  /// Parses a descriptor such as "pid,t,uid,rid" (any permutation).
  static TraceFormat with_order(std::string_view descriptor, Delimiter delimiter = Delimiter::Tab);
};

/// Parses raw lines. Blank lines are skipped; a first non-blank line whose
/// timestamp column is not an integer is treated as a header. A rid of
/// "-1" (or an empty rid column) marks an original post.
Trace parse_trace(const std::vector<std::string>& lines, const TraceFormat& format = {});

/// Inverse of parse_trace (no header line).
std::vector<std::string> serialize_trace(const Trace& trace, const TraceFormat& format = {});

struct PreprocessReport {
  std::size_t no_reposts = 0;        // originals nobody reposted
  std::size_t unknown_original = 0;  // reposts whose rid is not an original in the log
  std::size_t duplicate = 0;         // repeated (uid, rid) reposts, earliest kept
  std::size_t self_repost = 0;       // author reposting their own post
};

struct PreprocessResult {
  Trace trace;
  PreprocessReport removed;
};

/// Cleans a parsed trace so every remaining repost can be attributed to an
/// episode and every remaining original has at least one repost.
PreprocessResult preprocess(const Trace& trace);

}  // namespace tracegraph
