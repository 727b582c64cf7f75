#include "embshift/embedding.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "embshift/errors.hpp"

namespace embshift {

const std::vector<double> &EmbeddingSnapshot::vec(const std::string &node) const {
    auto it = vectors.find(node);
    if (it == vectors.end()) throw DataError("unknown node '" + node + "'");
    return it->second;
}

namespace {

void write_table(std::ofstream &out,
                 const std::map<std::string, std::vector<double>> &table) {
    char buf[40];
    for (const auto &[node, v] : table) {
        out << node;
        for (double x : v) {
            std::snprintf(buf, sizeof(buf), " %.17g", x);
            out << buf;
        }
        out << '\n';
    }
}

void read_table(std::ifstream &in, std::size_t n, int dim,
                std::map<std::string, std::vector<double>> &table,
                const std::string &path) {
    std::string line;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::getline(in, line))
            throw DataError(path + ": truncated table (row " + std::to_string(i) + ")");
        std::istringstream row(line);
        std::string node;
        row >> node;
        std::vector<double> v(dim);
        for (int j = 0; j < dim; ++j)
            if (!(row >> v[j]))
                throw DataError(path + ": row for '" + node + "' has fewer than " +
                                std::to_string(dim) + " components");
        table.emplace(std::move(node), std::move(v));
    }
}

}  // namespace

void save_snapshot(const std::filesystem::path &path,
                   const EmbeddingSnapshot &snapshot) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << snapshot.timestamp_index << ' ' << snapshot.dim << ' '
        << snapshot.vectors.size();
    if (snapshot.smoothed) out << " smoothed";
    out << '\n';
    write_table(out, snapshot.vectors);
    if (!snapshot.context_vectors.empty()) {
        out << "#context " << snapshot.context_vectors.size() << '\n';
        write_table(out, snapshot.context_vectors);
    }
    if (!snapshot.updated_this_round.empty()) {
        out << "#updated " << snapshot.updated_this_round.size() << '\n';
        for (const auto &node : snapshot.updated_this_round) out << node << '\n';
    }
}

EmbeddingSnapshot load_snapshot(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    EmbeddingSnapshot snap;
    std::string line;
    if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
    {
        std::istringstream header(line);
        std::size_t n = 0;
        std::string flag;
        if (!(header >> snap.timestamp_index >> snap.dim >> n))
            throw DataError(path.string() + ": malformed header");
        if (header >> flag) snap.smoothed = (flag == "smoothed");
        read_table(in, n, snap.dim, snap.vectors, path.string());
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream header(line);
        std::string tag;
        std::size_t n = 0;
        header >> tag >> n;
        if (tag == "#context") {
            read_table(in, n, snap.dim, snap.context_vectors, path.string());
        } else if (tag == "#updated") {
            std::string node;
            for (std::size_t i = 0; i < n; ++i) {
                if (!std::getline(in, node))
                    throw DataError(path.string() + ": truncated updated list");
                snap.updated_this_round.insert(node);
            }
        } else {
            throw DataError(path.string() + ": unknown section '" + tag + "'");
        }
    }
    return snap;
}

}  // namespace embshift
