#include "drn/train/cost.h"

namespace drn::train {

CostProfile ComputeCost(const model::DrnConfig& cfg) {
  cfg.Validate();
  const int64_t C = cfg.channels, H = cfg.hidden, Ec = cfg.channel_embed,
                Ef = cfg.frame_embed, Da = cfg.grid.azimuth_bins,
                De = cfg.grid.elevation_bins;
  const int64_t fin = cfg.input_features(), fout = cfg.output_features();
  CostProfile p;
  auto add = [&p](std::string name, int64_t params, int64_t macs) {
    p.layers.push_back({std::move(name), params, macs});
  };
  // Linear + LN + PReLU: in*out + out weights/bias, 2 out norm, out slope.
  auto dnp = [](int64_t in, int64_t out) { return in * out + out + 3 * out; };

  if (cfg.domain == model::Domain::kFrequency) {
    add("input_dft", 0, C * cfg.input_window * fin);
  }
  add("input", dnp(fin, H), C * fin * H);
  if (cfg.uses_channelwise()) {
    const int64_t per_channel =
        dnp(Da, Ec) + (cfg.uses_elevation() ? dnp(De, Ec) : 0) + 2 * Ec;
    add("chan_emb.lookup", C * per_channel, 0);
    add("chan_emb.proj", Ec * H + H + 2 * H, C * Ec * H);
  }
  add("spatial", dnp(C * H, H), C * H * H);
  if (cfg.uses_framewise()) {
    add("frame_emb.lookup",
        dnp(Da, Ef) + (cfg.uses_elevation() ? dnp(De, Ef) : 0) + 2 * Ef, 0);
    for (int i = 0; i < cfg.framewise_fusions(); ++i) {
      add("frame_emb.fc." + std::to_string(i), dnp(Ef, Ef), Ef * Ef);
      add("frame_emb.proj." + std::to_string(i), Ef * H + H + 2 * H, Ef * H);
    }
  }
  for (int l = 0; l < cfg.lstm_layers; ++l) {
    add("lstm." + std::to_string(l), 4 * H * H * 2 + 4 * H, 4 * (H + H) * H);
  }
  add("output", H * fout, H * fout);
  if (cfg.domain == model::Domain::kFrequency) {
    add("output_idft", 0, fout * cfg.output_window);
  }
  for (const auto& l : p.layers) {
    p.params += l.params;
    p.macs_per_frame += l.macs_per_frame;
  }
  p.frames_per_second = cfg.sample_rate / cfg.shift;
  p.macs_per_second = static_cast<double>(p.macs_per_frame) * p.frames_per_second;
  return p;
}

void to_json(nlohmann::json& j, const CostProfile& c) {
  j = {{"params", c.params},
       {"macs_per_frame", c.macs_per_frame},
       {"frames_per_second", c.frames_per_second},
       {"macs_per_second", c.macs_per_second},
       {"gmacs_per_second", c.macs_per_second * 1e-9}};
  auto& layers = j["layers"] = nlohmann::json::array();
  for (const auto& l : c.layers) {
    layers.push_back({{"name", l.name},
                      {"params", l.params},
                      {"macs_per_frame", l.macs_per_frame}});
  }
}

}  // namespace drn::train
