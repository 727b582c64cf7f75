#include "embshift/transactions.hpp"

#include <algorithm>
#include <istream>
#include <limits>

#include "embshift/errors.hpp"
#include "embshift/time_utils.hpp"

namespace embshift {

namespace {

std::vector<std::string> split_line(const std::string &line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(delim, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

}  // namespace

IngestResult ingest(std::istream &input, const IngestFormat &format) {
    const ColumnMapping &cols = format.columns;
    const int required[] = {cols.account, cols.merchant, cols.timestamp,
                            cols.category};
    int max_col = -1;
    for (int c : required) {
        if (c < 0) throw ConfigError("column mapping contains a negative index");
        max_col = std::max(max_col, c);
    }
    if (cols.account == cols.merchant || cols.account == cols.timestamp ||
        cols.merchant == cols.timestamp)
        throw ConfigError("column mapping assigns two fields to the same column");

    IngestResult result;
    std::string line;
    std::size_t line_number = 0;
    bool header_pending = format.has_header;
    while (std::getline(input, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (header_pending) {
            header_pending = false;
            auto fields = split_line(line, format.delimiter);
            if (static_cast<int>(fields.size()) <= max_col)
                throw ConfigError("header has " + std::to_string(fields.size()) +
                                  " columns but mapping needs column " +
                                  std::to_string(max_col));
            continue;
        }
        if (line.empty()) continue;
        auto fields = split_line(line, format.delimiter);
        if (static_cast<int>(fields.size()) <= max_col) {
            result.errors.push_back(
                {line_number, "expected at least " + std::to_string(max_col + 1) +
                                  " columns, got " + std::to_string(fields.size())});
            continue;
        }
        TransactionRecord rec;
        rec.account_id = fields[cols.account];
        rec.merchant_id = fields[cols.merchant];
        rec.category = fields[cols.category];
        if (rec.account_id.empty() || rec.merchant_id.empty()) {
            result.errors.push_back({line_number, "empty account or merchant id"});
            continue;
        }
        auto ts = parse_timestamp(fields[cols.timestamp]);
        if (!ts) {
            result.errors.push_back(
                {line_number, "unparseable timestamp '" + fields[cols.timestamp] + "'"});
            continue;
        }
        rec.timestamp = *ts;
        result.records.push_back(std::move(rec));
    }
    return result;
}

std::vector<std::pair<SnapshotWindow, std::vector<TransactionRecord>>>
window_partition(const std::vector<TransactionRecord> &records,
                 const WindowSpec &spec) {
    if (records.empty()) throw DataError("window_partition: no records");

    std::int64_t min_ts = std::numeric_limits<std::int64_t>::max();
    std::int64_t max_ts = std::numeric_limits<std::int64_t>::min();
    for (const auto &r : records) {
        min_ts = std::min(min_ts, r.timestamp);
        max_ts = std::max(max_ts, r.timestamp);
    }

    std::vector<std::pair<SnapshotWindow, std::vector<TransactionRecord>>> out;
    if (spec.kind == WindowSpec::Kind::monthly) {
        auto [y0, m0] = year_month_of(min_ts);
        auto [y1, m1] = year_month_of(max_ts);
        int y = y0, m = m0, index = 0;
        while (y < y1 || (y == y1 && m <= m1)) {
            int ny = m == 12 ? y + 1 : y;
            int nm = m == 12 ? 1 : m + 1;
            SnapshotWindow w{index++, month_start_epoch(y, m),
                             month_start_epoch(ny, nm)};
            out.emplace_back(w, std::vector<TransactionRecord>{});
            y = ny;
            m = nm;
        }
    } else {
        if (spec.duration_seconds <= 0)
            throw ConfigError("fixed window duration must be positive");
        std::int64_t start = min_ts;
        int index = 0;
        while (start <= max_ts) {
            SnapshotWindow w{index++, start, start + spec.duration_seconds};
            out.emplace_back(w, std::vector<TransactionRecord>{});
            start += spec.duration_seconds;
        }
    }

    const std::int64_t origin = out.front().first.start;
    for (const auto &r : records) {
        std::size_t idx;
        if (spec.kind == WindowSpec::Kind::monthly) {
            auto [y, m] = year_month_of(r.timestamp);
            auto [y0, m0] = year_month_of(origin);
            idx = static_cast<std::size_t>((y - y0) * 12 + (m - m0));
        } else {
            idx = static_cast<std::size_t>((r.timestamp - origin) /
                                           spec.duration_seconds);
        }
        out[idx].second.push_back(r);
    }
    return out;
}

}  // namespace embshift
