#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace embshift {

struct TransactionRecord {
    std::string account_id;
    std::string merchant_id;
    std::int64_t timestamp = 0;  // UTC epoch seconds
    std::string category;

    bool operator==(const TransactionRecord &) const = default;
};

struct ColumnMapping {
    int account = 0;
    int merchant = 1;
    int timestamp = 2;
    int category = 3;
};

struct IngestFormat {
    char delimiter = ',';
    bool has_header = false;
    ColumnMapping columns;
};

struct LineError {
    std::size_t line_number = 0;  // 1-based
    std::string message;
};

struct IngestResult {
    std::vector<TransactionRecord> records;
    std::vector<LineError> errors;
};

// Parses delimiter-separated text into validated records. Malformed lines
// are reported in `errors`, never silently dropped. Throws ConfigError if
// the column mapping is unusable (negative index, duplicate columns).
IngestResult ingest(std::istream &input, const IngestFormat &format);

// Half-open time window [start, end).
struct SnapshotWindow {
    int index = 0;
    std::int64_t start = 0;
    std::int64_t end = 0;

    bool contains(std::int64_t t) const { return t >= start && t < end; }
    bool operator==(const SnapshotWindow &) const = default;
};

struct WindowSpec {
    enum class Kind { monthly, fixed_duration };
    Kind kind = Kind::monthly;
    std::int64_t duration_seconds = 0;  // fixed_duration only
};

// Assigns every record to exactly one window; windows are contiguous,
// chronological and cover the full record span (empty windows included).
// Throws DataError on empty input.
std::vector<std::pair<SnapshotWindow, std::vector<TransactionRecord>>>
window_partition(const std::vector<TransactionRecord> &records,
                 const WindowSpec &spec);

}  // namespace embshift
