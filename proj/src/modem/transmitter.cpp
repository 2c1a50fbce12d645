#include "rfmesh/modem/transmitter.hpp"

#include <map>
#include <mutex>

#include "rfmesh/dsp/filter_design.hpp"
#include "rfmesh/dsp/nco.hpp"
#include "rfmesh/dsp/resample.hpp"
#include "rfmesh/errors.hpp"
#include "rfmesh/modem/constellation.hpp"

namespace rfmesh::modem {

using framing::DiversityMode;
using framing::SegmentKind;

void TxConfig::validate(const mesh::BandPlan& band) const
{
    if (!(gain > 0.0)) throw ParameterError("TxConfig: gain must be positive");
    if (band_index < 0 || band_index >= band.band_count()) throw ParameterError("TxConfig: invalid band index");
    if (samples_per_symbol != band.composite_oversampling)
        throw ParameterError("TxConfig: samples_per_symbol must match the composite oversampling");
    if (diversity_mode != DiversityMode::Alamouti && diversity_mode != DiversityMode::SingleTxMrc)
        throw ParameterError("TxConfig: invalid diversity mode");
}

const dsp::FirTapsd& shaping_filter(int samples_per_symbol)
{
    static std::mutex mu;
    static std::map<int, dsp::FirTapsd> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(samples_per_symbol);
    if (it == cache.end())
        it = cache.emplace(samples_per_symbol, dsp::design_srrc<double>(0.5, 8, samples_per_symbol)).first;
    return it->second;
}

FrameSymbols build_frame_symbols(const framing::EncodedFrame& frame, DiversityMode mode,
                                 const framing::TrainingSequences& training)
{
    const auto& g = frame.geometry;
    FrameSymbols fs;
    fs.geometry = g;
    fs.antenna[0].assign(g.total_symbols, cd{});
    fs.antenna[1].assign(g.total_symbols, cd{});
    auto& a0 = fs.antenna[0];
    auto& a1 = fs.antenna[1];

    const auto pre = frame.segment_bits(SegmentKind::Preamble);
    for (std::size_t k = 0; k < pre.size(); ++k) a0[g.preamble_start + k] = pre[k] ? -1.0 : 1.0;
    for (std::size_t k = 0; k < training.antenna_a.size(); ++k) {
        a0[g.training_a_start + k] = training.antenna_a[k];
        a1[g.training_b_start + k] = training.antenna_b[k];
    }
    const auto header = map_qpsk(frame.segment_bits(SegmentKind::Header));
    std::copy(header.begin(), header.end(), a0.begin() + static_cast<std::ptrdiff_t>(g.header_start));

    const auto mod = frame.descriptor.modulation;
    std::vector<cd> data = map_bits(frame.segment_bits(SegmentKind::Payload), mod);
    const auto crc = map_bits(frame.segment_bits(SegmentKind::Crc), mod);
    data.insert(data.end(), crc.begin(), crc.end());

    // Data positions in frame order, skipping pilots.
    std::vector<std::size_t> pos;
    pos.reserve(data.size());
    for (std::size_t s = g.payload_start; s < g.total_symbols; ++s) {
        if (g.is_pilot(s)) {
            a0[s] = training.pilot_symbol;
            continue;
        }
        pos.push_back(s);
    }
    if (pos.size() != data.size()) throw ContractError("build_frame_symbols: data/position count mismatch");

    if (mode == DiversityMode::SingleTxMrc) {
        for (std::size_t k = 0; k < data.size(); ++k) a0[pos[k]] = data[k];
    } else {
        if (data.size() % 2 != 0) throw ContractError("build_frame_symbols: Alamouti needs an even data count");
        for (std::size_t k = 0; k < data.size(); k += 2) {
            const cd s1 = data[k];
            const cd s2 = data[k + 1];
            a0[pos[k]] = s1;
            a1[pos[k]] = s2;
            a0[pos[k + 1]] = -std::conj(s2);
            a1[pos[k + 1]] = std::conj(s1);
        }
    }
    return fs;
}

std::array<dsp::SampleBlockd, 2> tx_frame(const framing::EncodedFrame& frame, const TxConfig& cfg,
                                          const mesh::BandPlan& band, std::int64_t start_index)
{
    cfg.validate(band);
    if (frame.descriptor.diversity_mode != cfg.diversity_mode)
        throw ParameterError("tx_frame: frame diversity mode does not match TxConfig");
    const auto training = framing::training_sequences(framing::kDefaultTrainingSeed,
                                                      static_cast<int>(frame.segment(SegmentKind::TrainingA).symbol_count));
    const FrameSymbols fs = build_frame_symbols(frame, cfg.diversity_mode, training);
    const auto& shaping = shaping_filter(cfg.samples_per_symbol);
    const int sps = cfg.samples_per_symbol;
    const auto tail = shaping.size() - 1;
    const auto pad_symbols = (tail + sps - 1) / sps;
    const dsp::Nco<double> nco(band.center_normalized(cfg.band_index));

    std::array<dsp::SampleBlockd, 2> out;
    for (int a = 0; a < 2; ++a) {
        dsp::SampleBlockd sym;
        sym.sample_rate = band.symbol_rate;
        sym.samples = dsp::CVector<double>::Zero(static_cast<Eigen::Index>(fs.antenna[a].size()) + pad_symbols);
        for (std::size_t k = 0; k < fs.antenna[a].size(); ++k) sym.samples[static_cast<Eigen::Index>(k)] = fs.antenna[a][k];
        dsp::SampleBlockd shaped = dsp::rate_change(sym, sps, 1, shaping);
        const Eigen::Index len = static_cast<Eigen::Index>(fs.antenna[a].size()) * sps + tail;
        auto& blk = out[static_cast<std::size_t>(a)];
        blk.samples = shaped.samples.head(len) * cfg.gain;
        blk.sample_rate = band.composite_rate;
        blk.start_index = start_index;
        nco.mix_inplace(blk.samples.data(), blk.size(), start_index);
    }
    return out;
}

} // namespace rfmesh::modem
