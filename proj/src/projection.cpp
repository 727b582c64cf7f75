#include "embshift/projection.hpp"

#include <fstream>

#include "embshift/errors.hpp"
#include "embshift/time_utils.hpp"

namespace embshift {

std::string to_string(NodeType t) {
    return t == NodeType::merchant ? "merchant" : "account";
}

NodeType node_type_from_string(const std::string &s) {
    if (s == "merchant") return NodeType::merchant;
    if (s == "account") return NodeType::account;
    throw ConfigError("unknown node type '" + s + "'");
}

void PairMultiset::add(const std::string &a, const std::string &b,
                       std::int64_t count) {
    if (a == b) throw DataError("self-pair (" + a + ", " + b + ")");
    if (count < 1) throw DataError("pair count must be >= 1");
    auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    counts[key] += count;
}

void PairMultiset::trim(std::int64_t min_count) {
    for (auto it = counts.begin(); it != counts.end();) {
        if (it->second < min_count)
            it = counts.erase(it);
        else
            ++it;
    }
}

std::set<std::string> PairMultiset::nodes() const {
    std::set<std::string> out;
    for (const auto &[key, _] : counts) {
        out.insert(key.first);
        out.insert(key.second);
    }
    return out;
}

std::map<std::string, std::int64_t> PairMultiset::node_weights() const {
    std::map<std::string, std::int64_t> out;
    for (const auto &[key, c] : counts) {
        out[key.first] += c;
        out[key.second] += c;
    }
    return out;
}

std::int64_t PairMultiset::total_count() const {
    std::int64_t total = 0;
    for (const auto &[_, c] : counts) total += c;
    return total;
}

PairMultiset project(std::span<const TransactionRecord> records,
                     NodeType node_type, const SnapshotWindow &window) {
    for (const auto &r : records)
        if (!window.contains(r.timestamp))
            throw DataError("record at " + format_timestamp(r.timestamp) +
                            " lies outside window " + std::to_string(window.index));

    // bridge -> endpoint -> transaction count
    std::map<std::string, std::map<std::string, std::int64_t>> bridges;
    for (const auto &r : records) {
        if (node_type == NodeType::merchant)
            bridges[r.account_id][r.merchant_id] += 1;
        else
            bridges[r.merchant_id][r.account_id] += 1;
    }

    PairMultiset out;
    out.window = window;
    out.node_type = node_type;
    for (const auto &[bridge, ends] : bridges) {
        for (auto it = ends.begin(); it != ends.end(); ++it) {
            auto jt = it;
            for (++jt; jt != ends.end(); ++jt)
                out.add(it->first, jt->first, it->second * jt->second);
        }
    }
    return out;
}

void save_pairs(const std::filesystem::path &path, const PairMultiset &pairs) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << "# window_index\t" << pairs.window.index << "\n";
    out << "# window_start\t" << format_timestamp(pairs.window.start) << "\n";
    out << "# window_end\t" << format_timestamp(pairs.window.end) << "\n";
    out << "# node_type\t" << to_string(pairs.node_type) << "\n";
    for (const auto &[key, c] : pairs.counts)
        out << key.first << '\t' << key.second << '\t' << c << '\n';
}

PairMultiset load_pairs(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    PairMultiset out;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto tab = line.find('\t');
            if (tab == std::string::npos) continue;
            std::string key = line.substr(2, tab - 2);
            std::string value = line.substr(tab + 1);
            if (key == "window_index")
                out.window.index = std::stoi(value);
            else if (key == "window_start")
                out.window.start = *parse_timestamp(value);
            else if (key == "window_end")
                out.window.end = *parse_timestamp(value);
            else if (key == "node_type")
                out.node_type = node_type_from_string(value);
            continue;
        }
        auto t1 = line.find('\t');
        auto t2 = line.find('\t', t1 + 1);
        if (t1 == std::string::npos || t2 == std::string::npos)
            throw DataError(path.string() + ":" + std::to_string(line_number) +
                            ": malformed pair line");
        out.add(line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1),
                std::stoll(line.substr(t2 + 1)));
    }
    return out;
}

}  // namespace embshift
