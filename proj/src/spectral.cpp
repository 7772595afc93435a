#include "diver/spectral.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "diver/kernels.hpp"

namespace diver {

CentralityVector eigencentrality(const Graph& g, const PowerOptions& opts) {
    const std::size_t n = g.size();
    if (n == 0) {
        throw Error("eigencentrality of an empty graph");
    }
    std::vector<double> pi(n, 1.0 / static_cast<double>(n));
    if (opts.start) {
        if (opts.start->size() != n) {
            throw Error("start vector has wrong dimension");
        }
        pi = *opts.start;
    }
    const bool parallel = opts.exec == Exec::parallel;
    const auto total = [&](std::span<const double> v) {
        return parallel ? kernels::sum_omp(v) : kernels::sum_serial(v);
    };
    {
        const double s = total(pi);
        if (!(s > 0.0)) {
            throw Error("start vector must have positive mass");
        }
        for (auto& p : pi) {
            p /= s;
        }
    }

    kernels::Transpose tr;
    if (parallel) {
        tr = kernels::transpose(g);
    }
    std::vector<double> next(n);
    double residual = 0.0;
    for (std::size_t it = 1; it <= opts.max_iter; ++it) {
        if (parallel) {
            kernels::left_multiply_omp(tr, pi, next);
        } else {
            kernels::left_multiply_serial(g, pi, next);
        }
        residual = parallel ? kernels::l1_distance_omp(next, pi)
                            : kernels::l1_distance_serial(next, pi);
        if (residual <= opts.tol) {
            return {std::move(pi), residual, it};
        }
        const double s = total(next);
        for (auto& p : next) {
            p /= s;
        }
        pi.swap(next);
    }
    std::ostringstream msg;
    msg << "power method did not converge in " << opts.max_iter
        << " iterations (residual " << residual << ")";
    throw Error(msg.str());
}

double consensus_value(std::span<const double> pi, std::span<const double> x) {
    if (pi.size() != x.size()) {
        throw Error("dimension mismatch: centrality has " + std::to_string(pi.size()) +
                    " entries, opinions have " + std::to_string(x.size()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) {
        s += pi[i] * x[i];
    }
    return s;
}

std::vector<double> read_vector(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open vector file " + path.string());
    }
    std::vector<std::pair<std::size_t, double>> entries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string a;
        std::string b;
        std::string extra;
        if (!(ls >> a) || a.front() == '#') {
            continue;
        }
        std::size_t node = 0;
        double value = 0.0;
        const bool ok = (ls >> b) && !(ls >> extra) &&
                        std::from_chars(a.data(), a.data() + a.size(), node).ptr ==
                            a.data() + a.size() &&
                        std::from_chars(b.data(), b.data() + b.size(), value).ptr ==
                            b.data() + b.size();
        if (!ok) {
            throw Error(path.string() + ":" + std::to_string(lineno) +
                        ": malformed line, expected `node<TAB>value`");
        }
        entries.emplace_back(node, value);
    }
    if (entries.empty()) {
        throw Error(path.string() + ": no entries");
    }
    std::vector<double> v(entries.size());
    std::vector<bool> seen(entries.size(), false);
    for (const auto& [node, value] : entries) {
        if (node >= v.size() || seen[node]) {
            throw Error(path.string() + ": node ids must be 0..n-1, each exactly once");
        }
        seen[node] = true;
        v[node] = value;
    }
    return v;
}

void write_vector(std::span<const double> v, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write vector file " + path.string());
    }
    char buf[64];
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto res = std::to_chars(buf, buf + sizeof(buf), v[i]);
        out << i << '\t' << std::string_view(buf, res.ptr - buf) << '\n';
    }
}

} // namespace diver
