#include "tracegraph/trace.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <unordered_set>

#include "tracegraph/error.hpp"

namespace tracegraph {

namespace {

constexpr std::string_view kOriginalMarker = "-1";

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  Timestamp value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || text.empty()) {
    return std::nullopt;
  }
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, Delimiter delimiter) {
  std::vector<std::string_view> out;
  if (delimiter == Delimiter::Whitespace) {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      if (i == line.size()) break;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
      out.push_back(line.substr(i, j - i));
      i = j;
    }
    return out;
  }
  const char sep = delimiter == Delimiter::Tab ? '\t' : ',';
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

std::size_t column_of(const TraceFormat& format, Field field) {
  return static_cast<std::size_t>(std::find(format.order.begin(), format.order.end(), field) - format.order.begin());
}

}  // namespace

Trace Trace::from_records(std::vector<PostRecord> records) {
  std::stable_sort(records.begin(), records.end(),
                   [](const PostRecord& a, const PostRecord& b) { return a.t < b.t; });

  Trace trace;
  std::unordered_set<std::string_view> pids;
  pids.reserve(records.size());
  for (const auto& r : records) {
    if (!pids.insert(r.pid).second) {
      throw ValidationError("duplicate pid '" + r.pid + "'");
    }
    if (r.rid && *r.rid == r.pid) {
      throw ValidationError("post '" + r.pid + "' reposts itself");
    }
  }
  trace.records_ = std::move(records);
  for (const auto& r : trace.records_) {
    if (r.is_original()) ++trace.originals_;
    if (trace.user_index_.try_emplace(r.uid, static_cast<UserId>(trace.users_.size())).second) {
      trace.users_.push_back(r.uid);
    }
  }
  return trace;
}

std::optional<UserId> Trace::user_id(std::string_view uid) const {
  auto it = user_index_.find(std::string(uid));
  if (it == user_index_.end()) return std::nullopt;
  return it->second;
}

TraceFormat TraceFormat::with_order(std::string_view descriptor, Delimiter delimiter) {
  TraceFormat format;
  format.delimiter = delimiter;
  std::set<Field> seen;
  std::size_t slot = 0;
  std::size_t start = 0;
  while (start <= descriptor.size()) {
    std::size_t pos = descriptor.find(',', start);
    if (pos == std::string_view::npos) pos = descriptor.size();
    const std::string_view name = descriptor.substr(start, pos - start);
    Field field;
    if (name == "pid") {
      field = Field::Pid;
    } else if (name == "t" || name == "time" || name == "timestamp") {
      field = Field::Time;
    } else if (name == "uid") {
      field = Field::Uid;
    } else if (name == "rid") {
      field = Field::Rid;
    } else {
      throw std::invalid_argument("unknown field '" + std::string(name) + "' in format descriptor");
    }
    if (slot == 4 || !seen.insert(field).second) {
      throw std::invalid_argument("format descriptor must list pid, t, uid, rid exactly once");
    }
    format.order[slot++] = field;
    start = pos + 1;
  }
  if (slot != 4) {
    throw std::invalid_argument("format descriptor must list pid, t, uid, rid exactly once");
  }
  return format;
}

Trace parse_trace(const std::vector<std::string>& lines, const TraceFormat& format) {
  for (Field f : {Field::Pid, Field::Time, Field::Uid, Field::Rid}) {
    if (std::count(format.order.begin(), format.order.end(), f) != 1) {
      throw std::invalid_argument("format order must list pid, t, uid, rid exactly once");
    }
  }
  const std::size_t pid_col = column_of(format, Field::Pid);
  const std::size_t time_col = column_of(format, Field::Time);
  const std::size_t uid_col = column_of(format, Field::Uid);
  const std::size_t rid_col = column_of(format, Field::Rid);

  std::vector<PostRecord> records;
  records.reserve(lines.size());
  bool first = true;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const std::string_view line = trim(lines[n]);
    if (is_blank(line)) continue;
    const auto fields = split(line, format.delimiter);
    if (fields.size() != 4) {
      throw ParseError(n + 1, "expected 4 fields, found " + std::to_string(fields.size()));
    }
    const auto t = parse_timestamp(fields[time_col]);
    if (!t) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw ParseError(n + 1, "timestamp '" + std::string(fields[time_col]) + "' is not an integer");
    }
    first = false;
    PostRecord r;
    r.pid = std::string(fields[pid_col]);
    r.t = *t;
    r.uid = std::string(fields[uid_col]);
    if (r.pid.empty() || r.uid.empty()) {
      throw ParseError(n + 1, "empty pid or uid");
    }
    const std::string_view rid = fields[rid_col];
    if (!rid.empty() && rid != kOriginalMarker) r.rid = std::string(rid);
    records.push_back(std::move(r));
  }
  return Trace::from_records(std::move(records));
}

std::vector<std::string> serialize_trace(const Trace& trace, const TraceFormat& format) {
  const char sep = format.delimiter == Delimiter::Comma ? ',' : (format.delimiter == Delimiter::Tab ? '\t' : ' ');
  std::vector<std::string> lines;
  lines.reserve(trace.post_count());
  for (const auto& r : trace.records()) {
    std::string line;
    for (std::size_t c = 0; c < 4; ++c) {
      if (c) line += sep;
      switch (format.order[c]) {
        case Field::Pid: line += r.pid; break;
        case Field::Time: line += std::to_string(r.t); break;
        case Field::Uid: line += r.uid; break;
        case Field::Rid: line += r.rid ? *r.rid : std::string(kOriginalMarker); break;
      }
    }
    lines.push_back(std::move(line));
  }
  return lines;
}

PreprocessResult preprocess(const Trace& trace) {
  PreprocessResult result;
  const auto& records = trace.records();

  std::unordered_map<std::string_view, const PostRecord*> originals;
  for (const auto& r : records) {
    if (r.is_original()) originals.emplace(r.pid, &r);
  }

  std::vector<bool> keep(records.size(), true);
  std::unordered_map<std::string_view, std::size_t> repost_count;
  std::set<std::pair<std::string_view, std::string_view>> seen;  // (uid, rid)
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& r = records[k];
    if (r.is_original()) continue;
    auto it = originals.find(*r.rid);
    if (it == originals.end()) {
      keep[k] = false;
      ++result.removed.unknown_original;
      continue;
    }
    if (it->second->uid == r.uid) {
      keep[k] = false;
      ++result.removed.self_repost;
      continue;
    }
    // records are time-sorted, so the first occurrence is the earliest
    if (!seen.emplace(r.uid, *r.rid).second) {
      keep[k] = false;
      ++result.removed.duplicate;
      continue;
    }
    ++repost_count[*r.rid];
  }

  std::vector<PostRecord> kept;
  kept.reserve(records.size());
  for (std::size_t k = 0; k < records.size(); ++k) {
    const auto& r = records[k];
    if (r.is_original() && !repost_count.contains(r.pid)) {
      ++result.removed.no_reposts;
      continue;
    }
    if (keep[k]) kept.push_back(r);
  }
  result.trace = Trace::from_records(std::move(kept));
  return result;
}

}  // namespace tracegraph
