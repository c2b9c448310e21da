#include "isomt/records.h"

#include <fstream>

#include "isomt/errors.h"
#include "json.hpp"

namespace isomt {

using nlohmann::json;

namespace {

constexpr int kVersion = 1;

json RowsJson(const std::vector<TargetRow>& rows) {
  json out = json::array();
  for (const TargetRow& r : rows) out.push_back(json::array({r.token, r.duration}));
  return out;
}

std::vector<TargetRow> RowsFrom(const json& j) {
  std::vector<TargetRow> rows;
  for (const json& r : j) rows.push_back({r.at(0).get<std::string>(), r.at(1).get<int>()});
  return rows;
}

std::ofstream OpenOut(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  return out;
}

// Calls fn(record, line) for every line after a matching header.
template <typename Fn>
void ReadRecords(const std::string& path, const std::string& format, Fn fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      if (line_no == 1) {
        if (j.value("format", "") != format) {
          throw ParseError(path + ": expected a " + format + " header", line_no);
        }
        if (j.value("version", 0) != kVersion) {
          throw ParseError(path + ": unsupported " + format + " version", line_no);
        }
        continue;
      }
      fn(j, line_no);
    } catch (const json::exception& e) {
      throw ParseError(path + ": record at line " + std::to_string(line_no) + ": " + e.what(),
                       line_no);
    }
  }
  if (line_no == 0) throw ParseError(path + ": empty file, expected a " + format + " header", 1);
}

}  // namespace

std::string JoinTokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

void WritePrepared(const std::string& path, const std::string& split,
                   const std::vector<PreparedRecord>& records) {
  std::ofstream out = OpenOut(path);
  out << json{{"format", "isomt-prepared"}, {"version", kVersion}, {"split", split},
              {"count", records.size()}}.dump()
      << '\n';
  for (const PreparedRecord& r : records) {
    const json j{{"id", r.id},
                 {"source_text", r.source_text},
                 {"subwords", r.subwords},
                 {"source", r.source},
                 {"rows", RowsJson(r.rows)},
                 {"main", r.streams.main},
                 {"dur", r.streams.dur},
                 {"total", r.streams.total},
                 {"pause", r.streams.pause},
                 {"segment", r.streams.segment},
                 {"segments", r.segments},
                 {"reference_segments", r.reference_segments},
                 {"constraint_segments", r.constraint_segments},
                 {"words", r.words},
                 {"interleaved", r.interleaved}};
    out << j.dump() << '\n';
  }
}

std::vector<PreparedRecord> ReadPrepared(const std::string& path) {
  std::vector<PreparedRecord> records;
  ReadRecords(path, "isomt-prepared", [&](const json& j, long line) {
    PreparedRecord r;
    r.id = j.at("id");
    r.source_text = j.at("source_text");
    r.subwords = j.at("subwords").get<std::vector<std::string>>();
    r.source = j.at("source").get<std::vector<int>>();
    r.rows = RowsFrom(j.at("rows"));
    r.streams.source_ids = r.source;
    r.streams.main = j.at("main").get<std::vector<int>>();
    r.streams.dur = j.at("dur").get<std::vector<int>>();
    r.streams.total = j.at("total").get<std::vector<int>>();
    r.streams.pause = j.at("pause").get<std::vector<int>>();
    r.streams.segment = j.at("segment").get<std::vector<int>>();
    r.segments = j.at("segments").get<std::vector<int>>();
    r.reference_segments = j.at("reference_segments").get<std::vector<int>>();
    r.constraint_segments = j.at("constraint_segments").get<std::vector<int>>();
    r.words = j.at("words").get<std::vector<std::string>>();
    r.interleaved = j.at("interleaved").get<std::vector<int>>();
    const std::size_t n = r.streams.main.size();
    if (r.streams.dur.size() != n || r.streams.total.size() != n || r.streams.pause.size() != n ||
        r.streams.segment.size() != n) {
      throw ParseError(path + ": target streams of unequal length", line);
    }
    records.push_back(std::move(r));
  });
  return records;
}

void WriteTranslations(const std::string& path, const std::vector<TranslationRecord>& records) {
  std::ofstream out = OpenOut(path);
  out << json{{"format", "isomt-translations"}, {"version", kVersion}, {"count", records.size()}}.dump()
      << '\n';
  for (const TranslationRecord& r : records) {
    json counters = json::array();
    for (const CounterState& s : r.counters)
      counters.push_back(json::array({s.total_remaining, s.pauses_remaining, s.segment_remaining,
                                      json(std::vector<long>(s.pending_segments.begin(), s.pending_segments.end()))}));
    const json j{{"index", r.index},
                 {"source_text", r.source_text},
                 {"constraint_segments", r.constraint_segments},
                 {"rows", RowsJson(r.rows)},
                 {"segments", r.segments},
                 {"pauses", r.pauses},
                 {"finished", r.finished},
                 {"well_formed", r.well_formed},
                 {"log_prob", r.log_prob},
                 {"counters", counters},
                 {"interleaved", r.interleaved}};
    out << j.dump() << '\n';
  }
}

std::vector<TranslationRecord> ReadTranslations(const std::string& path) {
  std::vector<TranslationRecord> records;
  ReadRecords(path, "isomt-translations", [&](const json& j, long) {
    TranslationRecord r;
    r.index = j.at("index");
    r.source_text = j.at("source_text");
    r.constraint_segments = j.at("constraint_segments").get<std::vector<int>>();
    r.rows = RowsFrom(j.at("rows"));
    r.segments = j.at("segments").get<std::vector<int>>();
    r.pauses = j.at("pauses");
    r.finished = j.at("finished");
    r.well_formed = j.at("well_formed");
    r.log_prob = j.at("log_prob");
    for (const json& c : j.at("counters")) {
      CounterState s;
      s.total_remaining = c.at(0);
      s.pauses_remaining = c.at(1);
      s.segment_remaining = c.at(2);
      for (long v : c.at(3).get<std::vector<long>>()) s.pending_segments.push_back(v);
      r.counters.push_back(s);
    }
    r.interleaved = j.at("interleaved");
    records.push_back(std::move(r));
  });
  return records;
}

}  // namespace isomt
