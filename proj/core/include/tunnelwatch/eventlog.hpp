#pragma once

#include <istream>
#include <string>
#include <vector>

#include "tunnelwatch/cada.hpp"

namespace tw {

/// One event-log JSONL record, without the trailing newline:
/// {"kind":...,"t":...,"track_id":<uint|null>,"evidence":{...}}
/// Evidence keys by kind -- Stop: iou, prev_bbox, cur_bbox;
/// WWD: iol, delta_v, prev_bbox, cur_bbox; Fire/Person: bbox, score.
std::string event_to_json_line(const Event& e);

/// Parses one event record; `line` is used for error reporting only.
Event parse_event_line(const std::string& text, std::uint64_t line);

/// Reads a full event log. Throws ParseError with the offending line.
std::vector<Event> read_event_stream(std::istream& in);

}  // namespace tw
