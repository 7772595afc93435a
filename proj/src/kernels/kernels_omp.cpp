#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include <omp.h>

#include "diver/kernels.hpp"
#include "walk_step.hpp"

namespace diver::kernels {

void left_multiply_omp(const Transpose& t, std::span<const double> x, std::span<double> y) {
    const auto n = static_cast<std::int64_t>(y.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t k = t.offsets[j]; k < t.offsets[j + 1]; ++k) {
            acc += x[t.rows[k]] * t.weights[k];
        }
        y[j] = acc;
    }
}

double sum_omp(std::span<const double> x) {
    const auto n = static_cast<std::int64_t>(x.size());
    double s = 0.0;
#pragma omp parallel for reduction(+ : s) schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        s += x[i];
    }
    return s;
}

double l1_distance_omp(std::span<const double> a, std::span<const double> b) {
    const auto n = static_cast<std::int64_t>(a.size());
    double s = 0.0;
#pragma omp parallel for reduction(+ : s) schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        s += std::abs(a[i] - b[i]);
    }
    return s;
}

void score_candidates_omp(const ScoringInputs& in, std::span<const Candidate> cands,
                          std::span<double> scores) {
    const std::size_t h = in.hubs.size();
    const std::size_t n = in.n;

    std::vector<double> hub_weight(h);
    for (std::size_t t = 0; t < h; ++t) {
        const NodeId j = in.hubs[t];
        hub_weight[t] = in.pi[j] * in.x_tilde[j];
    }

    // dest_part[c] = sum over hubs j != c of pi_j x~_j m_cj
    std::vector<double> dest_part(n);
    const auto nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < nn; ++c) {
        const double* row = in.to_hub.data() + static_cast<std::size_t>(c) * h;
        double acc = 0.0;
        for (std::size_t t = 0; t < h; ++t) {
            acc += hub_weight[t] * row[t];
        }
        const std::int64_t self = in.hub_index[c];
        if (self >= 0) {
            acc -= hub_weight[static_cast<std::size_t>(self)] * row[self];
        }
        dest_part[c] = acc;
    }

    // source_part[s] = sum over hubs j of pi_j x~_j (1 - m_rj)
    const std::size_t ns = in.sources.size();
    std::vector<double> source_part(ns);
    for (std::size_t s = 0; s < ns; ++s) {
        const double* from_r = in.from_src.data() + s * n;
        double acc = 0.0;
        for (std::size_t t = 0; t < h; ++t) {
            acc += hub_weight[t] * (1.0 - from_r[in.hubs[t]]);
        }
        source_part[s] = acc;
    }

    const auto count = static_cast<std::int64_t>(cands.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t k = 0; k < count; ++k) {
        const auto& cand = cands[k];
        const NodeId r = in.sources[cand.source];
        const NodeId c = cand.c;
        const double* from_r = in.from_src.data() + cand.source * n;
        double numer = dest_part[c] + source_part[cand.source];
        if (in.hub_index[c] < 0) {
            numer += in.pi[c] * (1.0 - from_r[c]) * in.x_tilde[c];
        }
        const double m_rr = from_r[r];
        const double m_cr = in.to_hub[static_cast<std::size_t>(c) * h + in.source_hub[cand.source]];
        scores[k] = cand.theta * numer / (m_rr + cand.theta * (m_cr - m_rr + 1.0));
    }
}

namespace {

// Per-(node, hub) state. The out-of-hub tallies telescope: summed over a node's visits,
// the hub-visit-count deltas add up to the last count snapshot and the time-sum deltas
// to the last time-sum snapshot, so only sum(delta * s) needs accumulating.
struct Slot {
    std::uint64_t snap_visits = 0;
    std::int64_t snap_time_sum = 0;
    std::int64_t weighted = 0;
    std::int64_t to_sum = 0;
    std::uint64_t to_count = 0;
};

// A run of consecutive steps on one node; runs on hubs always have length 1.
struct Run {
    NodeId node;
    std::uint32_t length;
    std::int64_t time;
    std::uint32_t hub_visits_before; // index into the chunk's hub visits
};

struct HubVisit {
    std::int64_t time;
    std::uint32_t hub;
    std::uint32_t next_same; // index of the same hub's next visit in the chunk, or kNone
};

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

struct HubState {
    std::int64_t last = -1; // latest visit, -1 if none
    std::uint64_t count = 0;
    std::int64_t time_sum = 0;
    std::int64_t next = -1; // next visit within the chunk, -1 if none
};

// Hub visits of the current chunk in time order, with the state of every hub before
// the chunk and after each multiple of kStride visits, so a replay can jump ahead.
struct HubTimeline {
    static constexpr std::size_t kStride = 32;
    std::vector<HubVisit> visits;
    std::vector<HubState> checkpoints; // (visit index / kStride) * hubs + hub

    void apply(HubState& st, const HubVisit& hv) const {
        st.last = hv.time;
        ++st.count;
        st.time_sum += hv.time;
        st.next = hv.next_same == kNone ? -1 : visits[hv.next_same].time;
    }
};

// Nodes [begin, end) with their slots; sized so the slots stay cache-resident while a
// chunk's runs on these nodes are replayed.
struct NodeBlock {
    NodeId begin = 0;
    NodeId end = 0;
    std::vector<Slot> slots;              // (node - begin) * hubs + hub
    std::vector<std::int64_t> last_visit; // start of the node's previous run, -1 if none
    // registrations whose closing hub visit lies beyond the chunk
    std::vector<std::vector<std::pair<NodeId, std::int64_t>>> pending;
    std::vector<HubState> hub; // hub state while replaying

    void replay(std::span<const Run> runs, std::span<const std::int32_t> hub_of,
                const HubTimeline& tl, std::span<std::uint64_t> visits) {
        const std::size_t h = pending.size();
        const std::span<const HubState> initial(tl.checkpoints.data(), h);
        for (std::size_t t = 0; t < h; ++t) {
            if (initial[t].next >= 0) {
                for (const auto& [i, si] : pending[t]) {
                    Slot& sl = slots[static_cast<std::size_t>(i - begin) * h + t];
                    sl.to_sum += initial[t].next - si;
                    ++sl.to_count;
                }
                pending[t].clear();
            }
        }
        hub.assign(initial.begin(), initial.end());

        std::size_t applied = 0;
        for (const auto& [v, length, s, target] : runs) {
            if (target >= applied + HubTimeline::kStride) {
                const std::size_t cp = target / HubTimeline::kStride;
                std::copy_n(tl.checkpoints.begin() + static_cast<std::ptrdiff_t>(cp * h), h,
                            hub.begin());
                applied = cp * HubTimeline::kStride;
            }
            for (; applied < target; ++applied) {
                const HubVisit& hv = tl.visits[applied];
                tl.apply(hub[hv.hub], hv);
            }
            visits[v] += length;
            std::int64_t& lv = last_visit[v - begin];
            const std::int64_t prev = lv;
            lv = s;
            const std::int32_t own = hub_of[v];
            Slot* row = slots.data() + static_cast<std::size_t>(v - begin) * h;
            for (std::size_t t = 0; t < h; ++t) {
                // a hub visit since the node's previous visit both opens a new excursion
                // for it and leaves out-of-hub passages to close; otherwise nothing changes
                const bool at_hub = static_cast<std::int32_t>(t) == own;
                const HubState& st = hub[t];
                if (!(st.last >= prev || at_hub)) {
                    continue;
                }
                Slot& sl = row[t];
                sl.weighted += static_cast<std::int64_t>(st.count - sl.snap_visits) * s;
                sl.snap_visits = st.count;
                sl.snap_time_sum = st.time_sum;
                // the excursion just opened closes at the hub's next visit; for the hub
                // itself that is the one after this visit, which is not applied yet
                std::int64_t closing = st.next;
                if (at_hub) {
                    const std::uint32_t after = tl.visits[target].next_same;
                    closing = after == kNone ? -1 : tl.visits[after].time;
                }
                if (closing >= 0) {
                    sl.to_sum += closing - s;
                    ++sl.to_count;
                } else {
                    pending[t].emplace_back(v, s);
                }
            }
        }
    }
};

// Touches the rows reachable from `row` so that leaving it does not stall on memory;
// with heavy self-loops the walk usually dwells long enough for this to pay off.
inline void prefetch_successors(const WalkTable& table, std::uint32_t row) {
    const WalkCell* header = table.cells.data() + row;
    const std::uint32_t deg = std::min<std::uint32_t>(header->next, 16);
    for (std::uint32_t k = 1; k <= deg; ++k) {
        __builtin_prefetch(table.cells.data() + header[k].row);
    }
}

} // namespace

WalkTallies walk_tallies_omp(const WalkTable& table, std::size_t n, std::span<const NodeId> hubs,
                             NodeId start, std::uint64_t steps, std::uint64_t seed) {
    const std::size_t h = hubs.size();
    // long chunks amortize loading each block's slots; ~16 steps per node keeps that cheap
    const std::uint64_t chunk = std::max<std::uint64_t>(std::uint64_t{1} << 20, 16 * n);
    constexpr std::size_t kBlockBytes = std::size_t{1} << 20;
    const std::size_t block_nodes =
        std::max<std::size_t>(64, kBlockBytes / (std::max<std::size_t>(h, 1) * sizeof(Slot)));

    std::vector<std::int32_t> hub_of(n, -1);
    for (std::size_t t = 0; t < h; ++t) {
        hub_of[hubs[t]] = static_cast<std::int32_t>(t);
    }
    std::vector<NodeBlock> blocks;
    for (std::size_t b = 0; b < n; b += block_nodes) {
        NodeBlock blk;
        blk.begin = static_cast<NodeId>(b);
        blk.end = static_cast<NodeId>(std::min(n, b + block_nodes));
        blk.slots.resize(static_cast<std::size_t>(blk.end - blk.begin) * h);
        blk.last_visit.assign(blk.end - blk.begin, -1);
        blk.pending.resize(h);
        blocks.push_back(std::move(blk));
    }
    HubTimeline tl;
    std::vector<HubState> carried(h); // hub state at the start of the chunk
    std::vector<std::uint32_t> latest(h); // index of each hub's latest visit in the chunk

    WalkTallies out;
    out.n = n;
    out.hubs = h;
    out.visits.assign(n, 0);

    std::mt19937_64 rng(seed);
    std::vector<Run> runs;
    std::vector<Run> sorted;
    std::vector<std::size_t> bucket_start(blocks.size() + 1);
    NodeId v = start;
    std::uint32_t row = table.row_of[start];
    prefetch_successors(table, row);
    std::uint64_t chunk_begin = 0;
    const std::uint64_t total_states = steps + 1;
    while (chunk_begin < total_states) {
        const std::uint64_t len = std::min<std::uint64_t>(chunk, total_states - chunk_begin);
        runs.clear();
        tl.visits.clear();
        std::fill(latest.begin(), latest.end(), kNone);
        for (std::uint64_t k = 0; k < len; ++k) {
            const auto s = static_cast<std::int64_t>(chunk_begin + k);
            const NodeId prev = v;
            if (s > 0) {
                const WalkCell& cell = detail::next_cell(table, row, rng);
                v = cell.next;
                if (v != prev) {
                    row = cell.row;
                    prefetch_successors(table, row);
                }
            }
            const std::int32_t hv = hub_of[v];
            // staying on a non-hub changes no tally: the node is already seen in every
            // open excursion and no hub visit is pending
            if (k > 0 && v == prev && hv < 0) {
                ++runs.back().length;
                continue;
            }
            runs.push_back({v, 1, s, static_cast<std::uint32_t>(tl.visits.size())});
            if (hv >= 0) {
                const auto t = static_cast<std::size_t>(hv);
                const auto idx = static_cast<std::uint32_t>(tl.visits.size());
                if (latest[t] != kNone) {
                    tl.visits[latest[t]].next_same = idx;
                }
                latest[t] = idx;
                tl.visits.push_back({s, static_cast<std::uint32_t>(t), kNone});
            }
        }
        for (auto& st : carried) {
            st.next = -1;
        }
        for (auto it = tl.visits.rbegin(); it != tl.visits.rend(); ++it) {
            carried[it->hub].next = it->time;
        }
        tl.checkpoints.clear();
        for (std::size_t i = 0; i <= tl.visits.size(); ++i) {
            if (i % HubTimeline::kStride == 0) {
                tl.checkpoints.insert(tl.checkpoints.end(), carried.begin(), carried.end());
            }
            if (i < tl.visits.size()) {
                tl.apply(carried[tl.visits[i].hub], tl.visits[i]);
            }
        }

        // stable counting sort of the runs by node block
        std::fill(bucket_start.begin(), bucket_start.end(), 0);
        for (const auto& r : runs) {
            ++bucket_start[r.node / block_nodes + 1];
        }
        std::partial_sum(bucket_start.begin(), bucket_start.end(), bucket_start.begin());
        sorted.resize(runs.size());
        {
            auto fill = bucket_start;
            for (const auto& r : runs) {
                sorted[fill[r.node / block_nodes]++] = r;
            }
        }

        const auto nb = static_cast<std::int64_t>(blocks.size());
#pragma omp parallel for schedule(dynamic, 1)
        for (std::int64_t b = 0; b < nb; ++b) {
            const auto bi = static_cast<std::size_t>(b);
            const std::span<const Run> mine(sorted.data() + bucket_start[bi],
                                            bucket_start[bi + 1] - bucket_start[bi]);
            blocks[bi].replay(mine, hub_of, tl, out.visits);
        }

        chunk_begin += len;
    }

    out.to_sum.resize(n * h);
    out.to_count.resize(n * h);
    out.from_sum.resize(h * n);
    out.from_count.resize(h * n);
    for (const auto& blk : blocks) {
        for (NodeId i = blk.begin; i < blk.end; ++i) {
            const Slot* row_slots = blk.slots.data() + static_cast<std::size_t>(i - blk.begin) * h;
            for (std::size_t t = 0; t < h; ++t) {
                const Slot& sl = row_slots[t];
                out.to_sum[static_cast<std::size_t>(i) * h + t] = sl.to_sum;
                out.to_count[static_cast<std::size_t>(i) * h + t] = sl.to_count;
                out.from_sum[t * n + i] = sl.weighted - sl.snap_time_sum;
                out.from_count[t * n + i] = sl.snap_visits;
            }
        }
    }
    return out;
}

} // namespace diver::kernels
