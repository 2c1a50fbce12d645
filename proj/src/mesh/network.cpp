#include "rfmesh/mesh/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>

#include "rfmesh/errors.hpp"

namespace rfmesh::mesh {

using framing::DiversityMode;
using framing::Modulation;

std::string_view to_string(PayloadSource s)
{
    switch (s) {
    case PayloadSource::Prbs23: return "PRBS23";
    case PayloadSource::File: return "FILE";
    case PayloadSource::SyntheticVideo: return "SYNTHETIC_VIDEO";
    }
    return "?";
}

PayloadSource payload_source_from_string(std::string_view s)
{
    for (auto p : {PayloadSource::Prbs23, PayloadSource::File, PayloadSource::SyntheticVideo})
        if (s == to_string(p)) return p;
    throw ParameterError("unknown payload source '" + std::string(s) + "'");
}

std::string_view to_string(ControlType t)
{
    switch (t) {
    case ControlType::SetGain: return "set_gain";
    case ControlType::SetModulation: return "set_modulation";
    case ControlType::SetDiversity: return "set_diversity";
    case ControlType::SetSnr: return "set_snr";
    case ControlType::SwapBands: return "swap_bands";
    case ControlType::SetBand: return "set_band";
    case ControlType::SetPayloadSource: return "set_payload_source";
    case ControlType::Pause: return "pause";
    case ControlType::Resume: return "resume";
    }
    return "?";
}

std::optional<ControlType> control_type_from_string(std::string_view s)
{
    for (auto t : {ControlType::SetGain, ControlType::SetModulation, ControlType::SetDiversity, ControlType::SetSnr,
                   ControlType::SwapBands, ControlType::SetBand, ControlType::SetPayloadSource, ControlType::Pause,
                   ControlType::Resume})
        if (s == to_string(t)) return t;
    return std::nullopt;
}

NetworkConfig::NetworkConfig()
{
    for (int n = 0; n < kNodes; ++n) nodes[static_cast<std::size_t>(n)].band = n;
}

int link_index(int src, int dst)
{
    if (src < 0 || src >= kNodes || dst < 0 || dst >= kNodes || src == dst) throw ParameterError("invalid link");
    return src * (kNodes - 1) + (dst < src ? dst : dst - 1);
}

std::pair<int, int> link_nodes(int index)
{
    const int src = index / (kNodes - 1);
    int dst = index % (kNodes - 1);
    if (dst >= src) ++dst;
    return {src, dst};
}

struct NetworkSimulator::Node {
    int id = 0;
    NodeConfig active;
    NodeConfig pending;
    std::int64_t switch_at = -1;
    int band_before = 0;
    std::int64_t rendered_end = 0;
    std::uint64_t rr = 0;
    std::array<std::uint32_t, kNodes> seq{};
    struct Wave {
        std::int64_t start;
        std::array<dsp::SampleBlockd, 2> blocks;
    };
    std::deque<Wave> waves;
    std::vector<TxFrameRecord> fresh;
    std::deque<TxFrameRecord> pending_frames;
    std::map<std::pair<int, std::uint32_t>, TxFrameRecord*> lookup;
    channel::RngStream payload_rng;
    framing::ByteVector file_bytes;
    std::size_t file_cursor = 0;
    std::uint64_t frames_sent = 0;
    std::int64_t last_frame_symbols = 0;

    Node(int node, const NodeConfig& cfg, std::uint64_t seed)
        : id(node)
        , active(cfg)
        , pending(cfg)
        , band_before(cfg.band)
        , payload_rng(seed, channel::StreamKind::Payload, node)
    {
    }

    int band_at(std::int64_t index) const { return switch_at > index ? band_before : pending.band; }
};

struct NetworkSimulator::Link {
    int src;
    int dst;
    modem::LinkReceiver rx;
    modem::LinkMetrics metrics;
    std::uint64_t delivered_bits = 0;
    std::uint64_t addressed_bits = 0;
    std::vector<modem::FrameReport> reports;
    std::vector<modem::cd> scatter;
    // Counters at the previous snapshot.
    std::uint64_t prev_bits = 0, prev_errors = 0, prev_expected = 0, prev_lost = 0;

    Link(int s, int d, const BandPlan& plan, int band, const modem::RxConfig& cfg)
        : src(s)
        , dst(d)
        , rx(plan, band, cfg)
    {
    }
};

NetworkSimulator::NetworkSimulator(NetworkConfig cfg)
    : cfg_(std::move(cfg))
    , plan_(build_band_plan(cfg_.symbol_rate))
    , base_snr_db_(cfg_.snr_db)
{
    if (cfg_.quantum_samples < 1) throw ParameterError("quantum_samples must be positive");
    if (cfg_.payload_len < 0 || cfg_.payload_len > cfg_.rx.layout.max_payload) throw ParameterError("payload_len out of range");
    if (!(cfg_.telemetry_period_s > 0.0)) throw ParameterError("telemetry_period_s must be positive");
    std::array<bool, kNodes> used{};
    for (const auto& n : cfg_.nodes) {
        if (n.band < 0 || n.band >= kNodes || used[static_cast<std::size_t>(n.band)])
            throw ParameterError("node bands must be a permutation of 0..3");
        used[static_cast<std::size_t>(n.band)] = true;
        if (!(n.gain > 0.0)) throw ParameterError("node gain must be positive");
    }
    for (int n = 0; n < kNodes; ++n) {
        auto node = std::make_unique<Node>(n, cfg_.nodes[static_cast<std::size_t>(n)], cfg_.seed);
        node->rendered_end = cfg_.lead_in_samples;
        if (node->active.payload_source == PayloadSource::File) {
            std::ifstream f(node->active.payload_file, std::ios::binary);
            if (!f) throw ParameterError("cannot read payload file '" + node->active.payload_file + "'");
            node->file_bytes.assign(std::istreambuf_iterator<char>(f), {});
            if (node->file_bytes.empty()) throw ParameterError("payload file is empty");
        }
        nodes_.push_back(std::move(node));
    }
    for (int k = 0; k < kLinks; ++k) {
        const auto [s, d] = link_nodes(k);
        links_.push_back(std::make_unique<Link>(s, d, plan_, cfg_.nodes[static_cast<std::size_t>(s)].band, cfg_.rx));
    }
    auto real = channel::make_realization(cfg_.profile, cfg_.snr_db, cfg_.seed, plan_);
    for (const auto& o : cfg_.link_snr) channel::set_link_snr(real, o.src, o.dst, o.snr_db, base_snr_db_);
    medium_ = std::make_unique<channel::Medium>(std::move(real), cfg_.seed);
    unsigned workers = 0;
    if (cfg_.concurrent) {
        const unsigned hw = cfg_.threads ? cfg_.threads : std::max(1u, std::thread::hardware_concurrency());
        workers = hw > 1 ? hw - 1 : 0;
    }
    pool_ = std::make_unique<WorkerPool>(workers);
    tick_ = std::max<std::int64_t>(1, samples_for(cfg_.telemetry_period_s));
    next_tick_ = tick_;
}

NetworkSimulator::~NetworkSimulator() = default;

double NetworkSimulator::seconds() const
{
    return static_cast<double>(now_) / plan_.composite_rate;
}

std::int64_t NetworkSimulator::samples_for(double seconds) const
{
    return std::llround(seconds * plan_.composite_rate);
}

std::int64_t NetworkSimulator::frame_period_samples(int node) const
{
    const auto& c = nodes_.at(static_cast<std::size_t>(node))->pending;
    const auto g = framing::frame_geometry(static_cast<std::size_t>(cfg_.payload_len), c.modulation, cfg_.rx.layout);
    return static_cast<std::int64_t>(g.total_symbols + static_cast<std::size_t>(cfg_.rx.layout.guard_symbols)) * plan_.samples_per_symbol;
}

std::array<int, kNodes> NetworkSimulator::band_assignment() const
{
    std::array<int, kNodes> b{};
    for (int n = 0; n < kNodes; ++n) b[static_cast<std::size_t>(n)] = nodes_[static_cast<std::size_t>(n)]->band_at(now_);
    return b;
}

const modem::LinkReceiver& NetworkSimulator::receiver(int src, int dst) const
{
    return links_[static_cast<std::size_t>(link_index(src, dst))]->rx;
}

framing::ByteVector NetworkSimulator::next_payload(Node& node, int dst, std::uint32_t seq)
{
    const auto len = static_cast<std::size_t>(cfg_.payload_len);
    switch (node.active.payload_source) {
    case PayloadSource::Prbs23: return framing::prbs_payload(node.id, dst, seq, len);
    case PayloadSource::File: {
        framing::ByteVector out(len);
        for (auto& b : out) {
            b = node.file_bytes[node.file_cursor];
            node.file_cursor = (node.file_cursor + 1) % node.file_bytes.size();
        }
        return out;
    }
    case PayloadSource::SyntheticVideo: {
        // Stand-in for a compressed video stream: a small frame-counter header
        // followed by incompressible bytes.
        framing::ByteVector out(len);
        auto& eng = node.payload_rng.engine();
        for (std::size_t k = 0; k < len; k += 8) {
            const std::uint64_t r = eng();
            for (std::size_t b = 0; b < 8 && k + b < len; ++b) out[k + b] = static_cast<std::uint8_t>(r >> (8 * b));
        }
        for (std::size_t b = 0; b < 4 && b < len; ++b) out[b] = static_cast<std::uint8_t>(node.frames_sent >> (8 * b));
        return out;
    }
    }
    return {};
}

void NetworkSimulator::render_frame(Node& node)
{
    node.active = node.pending;
    const int k = static_cast<int>(node.rr++ % (kNodes - 1));
    const int dst = k < node.id ? k : k + 1;
    framing::FrameDescriptor d;
    d.src_node = node.id;
    d.dst_node = dst;
    d.seq = node.seq[static_cast<std::size_t>(dst)]++;
    d.payload_len = static_cast<std::uint16_t>(cfg_.payload_len);
    d.modulation = node.active.modulation;
    d.diversity_mode = node.active.diversity_mode;
    d.prbs_payload = node.active.payload_source == PayloadSource::Prbs23;
    const auto payload = next_payload(node, dst, d.seq);
    const auto frame = framing::encode_frame(d, payload, cfg_.rx.layout);

    modem::TxConfig tx;
    tx.band_index = node.active.band;
    tx.gain = node.active.gain;
    tx.modulation = node.active.modulation;
    tx.diversity_mode = node.active.diversity_mode;
    tx.samples_per_symbol = plan_.samples_per_symbol;
    auto wave = modem::tx_frame(frame, tx, plan_, node.rendered_end);

    TxFrameRecord rec;
    rec.src = node.id;
    rec.dst = dst;
    rec.seq = d.seq;
    rec.band = tx.band_index;
    rec.start = node.rendered_end;
    rec.end = wave[0].end_index();
    rec.payload_bits = static_cast<std::uint32_t>(payload.size() * 8);
    node.fresh.push_back(rec);

    node.waves.push_back({node.rendered_end, std::move(wave)});
    node.last_frame_symbols = static_cast<std::int64_t>(frame.geometry.total_symbols);
    node.rendered_end += (node.last_frame_symbols + cfg_.rx.layout.guard_symbols) * plan_.samples_per_symbol;
    ++node.frames_sent;
}

void NetworkSimulator::render_until(Node& node, std::int64_t index)
{
    while (node.rendered_end < index) render_frame(node);
}

void NetworkSimulator::assemble_tx(Node& node, std::int64_t start, int len, std::array<dsp::SampleBlockd, 2>& out)
{
    for (auto& b : out) {
        b.samples = dsp::CVector<double>::Zero(len);
        b.sample_rate = plan_.composite_rate;
        b.start_index = start;
    }
    const std::int64_t end = start + len;
    for (const auto& w : node.waves) {
        const std::int64_t ws = w.start;
        const std::int64_t we = w.blocks[0].end_index();
        const std::int64_t lo = std::max(ws, start), hi = std::min(we, end);
        if (lo >= hi) continue;
        for (std::size_t a = 0; a < 2; ++a)
            out[a].samples.segment(lo - start, hi - lo) += w.blocks[a].samples.segment(lo - ws, hi - lo);
    }
    while (!node.waves.empty() && node.waves.front().blocks[0].end_index() <= end) node.waves.pop_front();
}

std::int64_t NetworkSimulator::next_break() const
{
    std::int64_t end = std::min({now_ + cfg_.quantum_samples, next_tick_, limit_});
    for (const auto& e : medium_events_)
        if (e.at > now_) end = std::min(end, e.at);
    return end;
}

void NetworkSimulator::step(const std::function<void(const NetworkSnapshot&)>& on_snapshot)
{
    // Channel changes due now.
    if (!medium_events_.empty()) {
        auto real = medium_->realization();
        bool changed = false;
        std::vector<MediumEvent> keep;
        for (const auto& e : medium_events_) {
            if (e.at <= now_) {
                channel::set_link_snr(real, e.src, e.dst, e.snr_db, base_snr_db_);
                changed = true;
            } else {
                keep.push_back(e);
            }
        }
        if (changed) medium_->set_realization(std::move(real));
        medium_events_ = std::move(keep);
    }

    const std::int64_t end = next_break();
    const int len = static_cast<int>(end - now_);
    channel::NodeWaveforms tx;
    pool_->parallel_for(kNodes, [&](std::size_t n) {
        render_until(*nodes_[n], end);
        assemble_tx(*nodes_[n], now_, len, tx[n]);
    });
    for (auto& node : nodes_) {
        for (auto& rec : node->fresh) {
            node->pending_frames.push_back(rec);
            node->lookup[{rec.dst, rec.seq}] = &node->pending_frames.back();
        }
        node->fresh.clear();
    }

    channel::NodeWaveforms rx;
    pool_->parallel_for(kNodes, [&](std::size_t d) { rx[d] = medium_->receive(tx, static_cast<int>(d)); });
    medium_->commit(tx);

    pool_->parallel_for(kLinks, [&](std::size_t k) {
        auto& l = *links_[k];
        l.reports = l.rx.process(rx[static_cast<std::size_t>(l.dst)]);
    });

    for (auto& lp : links_) {
        auto& l = *lp;
        for (const auto& r : l.reports) {
            l.metrics.add(r);
            if (r.outcome != modem::FrameOutcome::Decoded) continue;
            const auto& d = r.descriptor;
            if (d.src_node != l.src || !d.payload_crc_ok) continue;
            const std::uint64_t bits = r.payload.size() * 8;
            l.delivered_bits += bits;
            if (d.dst_node == l.dst) l.addressed_bits += bits;
            auto& node = *nodes_[static_cast<std::size_t>(l.src)];
            auto it = node.lookup.find({d.dst_node, d.seq});
            if (it != node.lookup.end()) it->second->delivered[static_cast<std::size_t>(l.dst)] = true;
            for (const auto& s : r.scatter) l.scatter.push_back(s);
        }
        l.reports.clear();
        constexpr std::size_t kMaxScatter = 512;
        if (l.scatter.size() > kMaxScatter) l.scatter.erase(l.scatter.begin(), l.scatter.end() - kMaxScatter);
    }

    now_ = end;
    retire_due(now_);
    if (now_ == next_tick_) {
        emit_snapshot(on_snapshot);
        next_tick_ += tick_;
    }
}

void NetworkSimulator::retire_due(std::int64_t processed)
{
    for (auto& np : nodes_) {
        auto& node = *np;
        while (!node.pending_frames.empty() && node.pending_frames.front().end + cfg_.due_margin_samples <= processed) {
            const auto& rec = node.pending_frames.front();
            for (int d = 0; d < kNodes; ++d) {
                if (d == node.id) continue;
                auto& m = links_[static_cast<std::size_t>(link_index(node.id, d))]->metrics;
                ++m.frames_expected;
                if (!rec.delivered[static_cast<std::size_t>(d)]) ++m.frames_lost;
                m.update_fer();
            }
            node.lookup.erase({rec.dst, rec.seq});
            if (keep_log_) retired_.push_back(rec);
            node.pending_frames.pop_front();
        }
    }
}

NetworkSnapshot NetworkSimulator::snapshot() const
{
    NetworkSnapshot s;
    s.sample_index = now_;
    s.timestamp = seconds();
    s.real_units = cfg_.real_rate_reporting;
    const double rs = cfg_.real_rate_reporting ? plan_.symbol_rate : 1.0;
    // Elapsed time in reporting units: seconds, or symbol periods.
    const double elapsed_samples = static_cast<double>(std::max<std::int64_t>(0, now_ - cfg_.lead_in_samples));
    const double elapsed = elapsed_samples / plan_.composite_oversampling / rs;
    s.occupied_bw_hz = plan_.occupied_bw / plan_.symbol_rate * rs;
    for (int k = 0; k < kLinks; ++k) {
        const auto& l = *links_[static_cast<std::size_t>(k)];
        auto& o = s.links[static_cast<std::size_t>(k)];
        o.src = l.src;
        o.dst = l.dst;
        o.band = nodes_[static_cast<std::size_t>(l.src)]->band_at(now_);
        o.metrics = l.metrics;
        o.delivered_bps = elapsed > 0.0 ? static_cast<double>(l.delivered_bits) / elapsed : 0.0;
        o.addressed_bps = elapsed > 0.0 ? static_cast<double>(l.addressed_bits) / elapsed : 0.0;
        const auto dbits = l.metrics.payload_bits - l.prev_bits;
        const auto derr = l.metrics.bit_errors - l.prev_errors;
        const auto dexp = l.metrics.frames_expected - l.prev_expected;
        const auto dlost = l.metrics.frames_lost - l.prev_lost;
        o.period_ber = dbits ? static_cast<double>(derr) / static_cast<double>(dbits) : 0.0;
        o.period_fer = dexp ? static_cast<double>(dlost) / static_cast<double>(dexp) : 0.0;
        o.constellation = l.scatter;
        s.aggregate_throughput_bps += o.delivered_bps;
        s.aggregate_addressed_bps += o.addressed_bps;
        const auto& src_cfg = nodes_[static_cast<std::size_t>(l.src)]->pending;
        s.aggregate_line_rate_bps += plan_.line_rate_bps(src_cfg.modulation) / plan_.symbol_rate * rs;
    }
    s.line_rate_bps = plan_.line_rate_bps(Modulation::Qam16) / plan_.symbol_rate * rs;
    for (int n = 0; n < kNodes; ++n) {
        const auto& node = *nodes_[static_cast<std::size_t>(n)];
        auto& o = s.nodes[static_cast<std::size_t>(n)];
        o.node = n;
        o.config = node.pending;
        o.config.band = node.band_at(now_);
        o.frames_sent = node.frames_sent;
    }
    const auto g = framing::frame_geometry(static_cast<std::size_t>(cfg_.payload_len), nodes_[0]->pending.modulation,
                                           cfg_.rx.layout);
    s.framing_efficiency = static_cast<double>(g.payload_data_symbols)
        / static_cast<double>(g.total_symbols + static_cast<std::size_t>(cfg_.rx.layout.guard_symbols));
    return s;
}

void NetworkSimulator::emit_snapshot(const std::function<void(const NetworkSnapshot&)>& on_snapshot)
{
    last_snapshot_ = snapshot();
    if (on_snapshot) on_snapshot(last_snapshot_);
    for (auto& lp : links_) {
        auto& l = *lp;
        l.prev_bits = l.metrics.payload_bits;
        l.prev_errors = l.metrics.bit_errors;
        l.prev_expected = l.metrics.frames_expected;
        l.prev_lost = l.metrics.frames_lost;
        l.scatter.clear();
    }
}

void NetworkSimulator::run_until(std::int64_t sample_index, const std::function<void(const NetworkSnapshot&)>& on_snapshot)
{
    limit_ = sample_index;
    while (now_ < sample_index) {
        step(on_snapshot);
    }
    limit_ = std::numeric_limits<std::int64_t>::max();
}

void NetworkSimulator::run_for(double secs, const std::function<void(const NetworkSnapshot&)>& on_snapshot)
{
    run_until(now_ + samples_for(secs), on_snapshot);
}

namespace {

bool valid_node(int n)
{
    return n >= 0 && n < kNodes;
}

} // namespace

std::optional<std::string> NetworkSimulator::validate(const ControlCommand& c) const
{
    auto need_node = [&]() -> std::optional<std::string> {
        if (!valid_node(c.node)) return "unknown node " + std::to_string(c.node);
        return std::nullopt;
    };
    switch (c.type) {
    case ControlType::SetGain:
        if (auto e = need_node()) return e;
        if (!std::isfinite(c.number) || c.number <= 0.0 || c.number > 10.0) return "gain must be in (0, 10]";
        return std::nullopt;
    case ControlType::SetModulation:
        if (auto e = need_node()) return e;
        if (c.text != "QPSK" && c.text != "QAM16") return "unknown modulation '" + c.text + "'";
        return std::nullopt;
    case ControlType::SetDiversity:
        if (auto e = need_node()) return e;
        if (c.text != "ALAMOUTI" && c.text != "SINGLE_TX_MRC") return "unknown diversity mode '" + c.text + "'";
        return std::nullopt;
    case ControlType::SetSnr:
        if (c.node != -1 && !valid_node(c.node)) return "unknown node " + std::to_string(c.node);
        if (c.src != -1 && !valid_node(c.src)) return "unknown node " + std::to_string(c.src);
        if (c.src != -1 && c.src == c.node) return "no link from a node to itself";
        if (!std::isfinite(c.number) || c.number < -20.0 || c.number > 80.0) return "snr_db must be in [-20, 80]";
        return std::nullopt;
    case ControlType::SwapBands: {
        if (!valid_node(c.node) || !valid_node(c.node_b)) return "unknown node";
        if (c.node == c.node_b) return "swap needs two distinct nodes";
        for (int n : {c.node, c.node_b})
            if (nodes_[static_cast<std::size_t>(n)]->switch_at > now_) return "band change already in progress for node " + std::to_string(n);
        return std::nullopt;
    }
    case ControlType::SetBand: {
        if (auto e = need_node()) return e;
        const double b = c.number;
        if (b != std::floor(b) || b < 0 || b >= kNodes) return "band must be an integer in [0, 3]";
        for (int n = 0; n < kNodes; ++n)
            if (n != c.node && nodes_[static_cast<std::size_t>(n)]->pending.band == static_cast<int>(b))
                return "band collision: band " + std::to_string(static_cast<int>(b)) + " is held by node " + std::to_string(n);
        return std::nullopt;
    }
    case ControlType::SetPayloadSource: {
        if (auto e = need_node()) return e;
        if (c.text != "PRBS23" && c.text != "SYNTHETIC_VIDEO" && c.text != "FILE") return "unknown payload source '" + c.text + "'";
        if (c.text == "FILE" && nodes_[static_cast<std::size_t>(c.node)]->file_bytes.empty()) return "node has no payload file";
        return std::nullopt;
    }
    case ControlType::Pause:
    case ControlType::Resume: return std::nullopt;
    }
    return "unknown command";
}

std::vector<ControlAck> NetworkSimulator::apply_controls(std::vector<ControlCommand> batch)
{
    std::vector<std::size_t> order(batch.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return batch[a].command_id < batch[b].command_id; });

    std::vector<ControlAck> acks(batch.size());
    using Key = std::tuple<int, int, int>;
    auto key_of = [](const ControlCommand& c) -> Key {
        switch (c.type) {
        case ControlType::SetSnr: return {static_cast<int>(c.type), c.src, c.node};
        case ControlType::SwapBands: return {static_cast<int>(c.type), std::min(c.node, c.node_b), std::max(c.node, c.node_b)};
        case ControlType::Pause:
        case ControlType::Resume: return {static_cast<int>(ControlType::Pause), 0, 0};
        default: return {static_cast<int>(c.type), c.node, 0};
        }
    };
    std::map<Key, std::uint64_t> winner;
    for (std::size_t k : order) {
        const auto& c = batch[k];
        auto& ack = acks[k];
        ack.command_id = c.command_id;
        if (auto err = validate(c)) {
            ack.ok = false;
            ack.reason = *err;
            continue;
        }
        ack.ok = true;
        ack.effective_index = now_;
        switch (c.type) {
        case ControlType::SetGain: {
            auto& n = *nodes_[static_cast<std::size_t>(c.node)];
            n.pending.gain = c.number;
            ack.effective_index = n.rendered_end;
            break;
        }
        case ControlType::SetModulation: {
            auto& n = *nodes_[static_cast<std::size_t>(c.node)];
            n.pending.modulation = c.text == "QPSK" ? Modulation::Qpsk : Modulation::Qam16;
            ack.effective_index = n.rendered_end;
            break;
        }
        case ControlType::SetDiversity: {
            auto& n = *nodes_[static_cast<std::size_t>(c.node)];
            n.pending.diversity_mode = c.text == "ALAMOUTI" ? DiversityMode::Alamouti : DiversityMode::SingleTxMrc;
            ack.effective_index = n.rendered_end;
            break;
        }
        case ControlType::SetPayloadSource: {
            auto& n = *nodes_[static_cast<std::size_t>(c.node)];
            n.pending.payload_source = payload_source_from_string(c.text);
            ack.effective_index = n.rendered_end;
            break;
        }
        case ControlType::SetSnr: {
            std::int64_t latest = now_;
            for (int s = 0; s < kNodes; ++s) {
                if (c.src != -1 && s != c.src) continue;
                for (int d = 0; d < kNodes; ++d) {
                    if (d == s || (c.node != -1 && d != c.node)) continue;
                    const std::int64_t at = std::max(now_, nodes_[static_cast<std::size_t>(s)]->rendered_end);
                    medium_events_.push_back({at, s, d, c.number});
                    latest = std::max(latest, at);
                }
            }
            ack.effective_index = latest;
            break;
        }
        case ControlType::SwapBands: {
            auto& a = *nodes_[static_cast<std::size_t>(c.node)];
            auto& b = *nodes_[static_cast<std::size_t>(c.node_b)];
            const std::int64_t at = std::max(a.rendered_end, b.rendered_end);
            const int band_a = a.pending.band, band_b = b.pending.band;
            for (auto* n : {&a, &b}) {
                n->band_before = n->pending.band;
                n->switch_at = at;
                n->rendered_end = at;
            }
            a.pending.band = band_b;
            b.pending.band = band_a;
            for (auto* n : {&a, &b})
                for (int d = 0; d < kNodes; ++d)
                    if (d != n->id) links_[static_cast<std::size_t>(link_index(n->id, d))]->rx.schedule_retune(at, n->pending.band);
            ack.effective_index = at;
            break;
        }
        case ControlType::SetBand: {
            auto& n = *nodes_[static_cast<std::size_t>(c.node)];
            const int band = static_cast<int>(c.number);
            if (band != n.pending.band) {
                n.band_before = n.pending.band;
                n.switch_at = n.rendered_end;
                n.pending.band = band;
                for (int d = 0; d < kNodes; ++d)
                    if (d != n.id) links_[static_cast<std::size_t>(link_index(n.id, d))]->rx.schedule_retune(n.rendered_end, band);
            }
            ack.effective_index = n.rendered_end;
            break;
        }
        case ControlType::Pause: paused_ = true; break;
        case ControlType::Resume: paused_ = false; break;
        }
        winner[key_of(c)] = c.command_id;
    }
    for (std::size_t k = 0; k < batch.size(); ++k) {
        if (!acks[k].ok) continue;
        acks[k].winning_command_id = winner[key_of(batch[k])];
    }
    return acks;
}

ControlAck NetworkSimulator::apply_control(const ControlCommand& cmd)
{
    return apply_controls({cmd}).front();
}

std::vector<NetworkSnapshot> step_network(double seconds, const NetworkConfig& cfg)
{
    NetworkSimulator sim(cfg);
    std::vector<NetworkSnapshot> out;
    sim.run_for(seconds, [&](const NetworkSnapshot& s) { out.push_back(s); });
    return out;
}

} // namespace rfmesh::mesh
