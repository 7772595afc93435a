#include "diver/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>
#include <string>
#include <system_error>

namespace diver {

Graph Graph::from_edges(std::size_t n, std::vector<Edge> edges, double row_sum_tol) {
    if (n == 0) {
        throw Error("graph has no nodes");
    }
    for (const auto& e : edges) {
        if (e.src >= n || e.dst >= n) {
            throw Error("edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) +
                        ") out of range for n=" + std::to_string(n));
        }
        if (!(e.weight > 0.0) || e.weight > 1.0 || !std::isfinite(e.weight)) {
            throw Error("edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) +
                        ") has weight outside (0,1]");
        }
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        return a.src != b.src ? a.src < b.src : a.dst < b.dst;
    });
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (edges[i].src == edges[i - 1].src && edges[i].dst == edges[i - 1].dst) {
            throw Error("duplicate edge (" + std::to_string(edges[i].src) + "," +
                        std::to_string(edges[i].dst) + ")");
        }
    }

    Graph g;
    g.offsets_.assign(n + 1, 0);
    g.cols_.reserve(edges.size());
    g.weights_.reserve(edges.size());
    for (const auto& e : edges) {
        ++g.offsets_[e.src + 1];
        g.cols_.push_back(e.dst);
        g.weights_.push_back(e.weight);
    }
    std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());

    if (row_sum_tol >= 0.0) {
        for (NodeId u = 0; u < n; ++u) {
            const auto w = g.weights(u);
            const double sum = std::accumulate(w.begin(), w.end(), 0.0);
            if (std::abs(sum - 1.0) > row_sum_tol) {
                std::ostringstream msg;
                msg.precision(17);
                msg << "row " << u << " sums to " << sum << ", not 1";
                throw Error(msg.str());
            }
        }
    }
    return g;
}

double Graph::weight(NodeId u, NodeId v) const {
    const auto cols = neighbors(u);
    const auto it = std::lower_bound(cols.begin(), cols.end(), v);
    if (it == cols.end() || *it != v) {
        return 0.0;
    }
    return weights_[offsets_[u] + static_cast<std::size_t>(it - cols.begin())];
}

bool Graph::has_edge(NodeId u, NodeId v) const {
    const auto cols = neighbors(u);
    return std::binary_search(cols.begin(), cols.end(), v);
}

std::vector<Edge> Graph::edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (NodeId u = 0; u < size(); ++u) {
        const auto cols = neighbors(u);
        const auto w = weights(u);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            out.push_back({u, cols[k], w[k]});
        }
    }
    return out;
}

Graph replace_row(const Graph& g, NodeId r, std::span<const NodeId> cols,
                  std::span<const double> weights) {
    Graph out;
    const std::size_t n = g.size();
    const std::size_t old_len = g.out_degree(r);
    out.offsets_.resize(n + 1);
    out.cols_.reserve(g.cols_.size() - old_len + cols.size());
    out.weights_.reserve(out.cols_.capacity());

    const auto begin_r = g.offsets_[r];
    const auto end_r = g.offsets_[r + 1];
    out.cols_.insert(out.cols_.end(), g.cols_.begin(), g.cols_.begin() + begin_r);
    out.weights_.insert(out.weights_.end(), g.weights_.begin(), g.weights_.begin() + begin_r);
    out.cols_.insert(out.cols_.end(), cols.begin(), cols.end());
    out.weights_.insert(out.weights_.end(), weights.begin(), weights.end());
    out.cols_.insert(out.cols_.end(), g.cols_.begin() + end_r, g.cols_.end());
    out.weights_.insert(out.weights_.end(), g.weights_.begin() + end_r, g.weights_.end());

    for (std::size_t u = 0; u <= n; ++u) {
        if (u <= r) {
            out.offsets_[u] = g.offsets_[u];
        } else {
            out.offsets_[u] = g.offsets_[u] - old_len + cols.size();
        }
    }
    return out;
}

std::vector<std::size_t> strongly_connected_components(const Graph& g, std::size_t* count) {
    const std::size_t n = g.size();
    constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> index(n, kUnset), low(n, 0), comp(n, kUnset);
    std::vector<bool> on_stack(n, false);
    std::vector<NodeId> stack;
    std::vector<std::pair<NodeId, std::size_t>> call; // node, next neighbor position
    std::size_t next_index = 0;
    std::size_t ncomp = 0;

    for (NodeId root = 0; root < n; ++root) {
        if (index[root] != kUnset) {
            continue;
        }
        call.push_back({root, 0});
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = true;
        while (!call.empty()) {
            auto& [u, pos] = call.back();
            const auto nbrs = g.neighbors(u);
            if (pos < nbrs.size()) {
                const NodeId v = nbrs[pos++];
                if (index[v] == kUnset) {
                    index[v] = low[v] = next_index++;
                    stack.push_back(v);
                    on_stack[v] = true;
                    call.push_back({v, 0});
                } else if (on_stack[v]) {
                    low[u] = std::min(low[u], index[v]);
                }
                continue;
            }
            const NodeId done = u;
            call.pop_back();
            if (!call.empty()) {
                const NodeId parent = call.back().first;
                low[parent] = std::min(low[parent], low[done]);
            }
            if (low[done] == index[done]) {
                NodeId w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    comp[w] = ncomp;
                } while (w != done);
                ++ncomp;
            }
        }
    }
    if (count) {
        *count = ncomp;
    }
    return comp;
}

std::size_t period(const Graph& g) {
    std::size_t ncomp = 0;
    strongly_connected_components(g, &ncomp);
    if (ncomp != 1) {
        return 0;
    }
    const std::size_t n = g.size();
    constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> level(n, kUnset);
    std::queue<NodeId> q;
    level[0] = 0;
    q.push(0);
    while (!q.empty()) {
        const NodeId u = q.front();
        q.pop();
        for (const NodeId v : g.neighbors(u)) {
            if (level[v] == kUnset) {
                level[v] = level[u] + 1;
                q.push(v);
            }
        }
    }
    std::size_t d = 0;
    for (NodeId u = 0; u < n; ++u) {
        for (const NodeId v : g.neighbors(u)) {
            const auto lu = static_cast<long long>(level[u]);
            const auto lv = static_cast<long long>(level[v]);
            d = std::gcd(d, static_cast<std::size_t>(std::llabs(lu + 1 - lv)));
        }
    }
    return d;
}

bool row_is_selfish(const Graph& g, NodeId r) {
    const double self = g.weight(r, r);
    const auto cols = g.neighbors(r);
    const auto w = g.weights(r);
    for (std::size_t k = 0; k < cols.size(); ++k) {
        if (cols[k] != r && !(self > w[k])) {
            return false;
        }
    }
    return self > 0.0;
}

ValidationReport validate(const Graph& g) {
    ValidationReport rep;
    const std::size_t n = g.size();
    for (NodeId u = 0; u < n; ++u) {
        const auto w = g.weights(u);
        const double sum = std::accumulate(w.begin(), w.end(), 0.0);
        rep.max_row_deviation = std::max(rep.max_row_deviation, std::abs(sum - 1.0));
        if (g.has_edge(u, u)) {
            rep.has_self_loop = true;
        }
        if (!row_is_selfish(g, u)) {
            rep.selfishness_violations.push_back(u);
        }
    }
    rep.row_stochastic = rep.max_row_deviation <= Graph::kRowSumTolerance;
    rep.rationally_selfish = rep.selfishness_violations.empty();

    std::size_t ncomp = 0;
    strongly_connected_components(g, &ncomp);
    rep.strongly_connected = ncomp == 1;
    if (rep.strongly_connected) {
        // a self-loop is a cycle of length 1, so gcd of cycle lengths is 1
        rep.aperiodic = rep.has_self_loop || period(g) == 1;
    }
    return rep;
}

void check_perturbation(const Graph& g, const EdgePerturbation& p) {
    if (p.r >= g.size() || p.c >= g.size()) {
        throw Error("perturbation endpoint out of range");
    }
    if (p.r == p.c) {
        throw Error("cannot add self-loop (" + std::to_string(p.r) + "," +
                    std::to_string(p.c) + ")");
    }
    if (!(p.theta > 0.0 && p.theta <= 1.0)) {
        throw Error("theta must lie in (0,1]");
    }
    if (g.has_edge(p.r, p.c)) {
        throw Error("edge (" + std::to_string(p.r) + "," + std::to_string(p.c) +
                    ") already present");
    }
}

Graph add_edge_perturbed(const Graph& g, const EdgePerturbation& p) {
    check_perturbation(g, p);
    const auto old_cols = g.neighbors(p.r);
    const auto old_w = g.weights(p.r);
    std::vector<NodeId> cols;
    std::vector<double> w;
    cols.reserve(old_cols.size() + 1);
    w.reserve(old_cols.size() + 1);
    const double keep = 1.0 - p.theta;
    bool inserted = false;
    for (std::size_t k = 0; k < old_cols.size(); ++k) {
        if (!inserted && old_cols[k] > p.c) {
            cols.push_back(p.c);
            w.push_back(p.theta);
            inserted = true;
        }
        const double scaled = keep * old_w[k];
        if (scaled > 0.0) {
            cols.push_back(old_cols[k]);
            w.push_back(scaled);
        }
    }
    if (!inserted) {
        cols.push_back(p.c);
        w.push_back(p.theta);
    }
    return replace_row(g, p.r, cols, w);
}

namespace {

template <class T>
bool parse_field(std::string_view s, T& out) {
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> parts;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == '\t' || line[i] == ' ' || line[i] == '\r')) {
            ++i;
        }
        const std::size_t start = i;
        while (i < line.size() && line[i] != '\t' && line[i] != ' ' && line[i] != '\r') {
            ++i;
        }
        if (i > start) {
            parts.push_back(line.substr(start, i - start));
        }
    }
    return parts;
}

} // namespace

Graph read_graph(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open graph file " + path.string());
    }
    std::vector<Edge> edges;
    std::size_t n = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto parts = split_ws(line);
        if (parts.empty() || parts[0].front() == '#') {
            continue;
        }
        Edge e{};
        unsigned long long src = 0;
        unsigned long long dst = 0;
        if (parts.size() != 3 || !parse_field(parts[0], src) || !parse_field(parts[1], dst) ||
            !parse_field(parts[2], e.weight) || src > 0xffffffffULL || dst > 0xffffffffULL) {
            throw Error(path.string() + ":" + std::to_string(lineno) +
                        ": malformed edge line, expected `src<TAB>dst<TAB>weight`");
        }
        e.src = static_cast<NodeId>(src);
        e.dst = static_cast<NodeId>(dst);
        n = std::max<std::size_t>(n, std::max(e.src, e.dst) + std::size_t{1});
        edges.push_back(e);
    }
    if (n == 0) {
        throw Error(path.string() + ": no nodes");
    }
    return Graph::from_edges(n, std::move(edges), Graph::kLoadRowSumTolerance);
}

void write_graph(const Graph& g, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write graph file " + path.string());
    }
    char buf[64];
    for (const auto& e : g.edges()) {
        // shortest round-trip representation keeps weights bit-exact on reload
        const auto res = std::to_chars(buf, buf + sizeof(buf), e.weight);
        out << e.src << '\t' << e.dst << '\t' << std::string_view(buf, res.ptr - buf) << '\n';
    }
}

} // namespace diver
