#include "drn/model/config.h"

#include <algorithm>
#include <stdexcept>

namespace drn::model {

std::string ToString(Domain d) {
  return d == Domain::kTime ? "time" : "frequency";
}

std::string ToString(EmbeddingMode m) {
  return m == EmbeddingMode::kAzimuth ? "A" : "AE";
}

std::string ToString(FusionMode m) {
  switch (m) {
    case FusionMode::kNone:
      return "none";
    case FusionMode::kChannelwise:
      return "channelwise";
    case FusionMode::kFramewise:
      return "framewise";
    case FusionMode::kBoth:
      return "both";
  }
  return "both";
}

Domain DomainFromString(const std::string& s) {
  if (s == "time" || s == "T") return Domain::kTime;
  if (s == "frequency" || s == "F") return Domain::kFrequency;
  throw std::invalid_argument("unknown domain: " + s);
}

EmbeddingMode EmbeddingModeFromString(const std::string& s) {
  if (s == "A") return EmbeddingMode::kAzimuth;
  if (s == "AE") return EmbeddingMode::kAzimuthElevation;
  throw std::invalid_argument("unknown embedding mode: " + s);
}

FusionMode FusionModeFromString(const std::string& s) {
  if (s == "none") return FusionMode::kNone;
  if (s == "channelwise") return FusionMode::kChannelwise;
  if (s == "framewise") return FusionMode::kFramewise;
  if (s == "both") return FusionMode::kBoth;
  throw std::invalid_argument("unknown fusion mode: " + s);
}

DrnConfig DrnConfig::LowLatency2ms() {
  DrnConfig c;
  c.shift = 16;
  c.input_window = 64;
  c.output_window = 32;
  return c;
}

DrnConfig DrnConfig::Latency16ms() {
  DrnConfig c;
  c.shift = 128;
  c.input_window = 256;
  c.output_window = 256;
  return c;
}

int DrnConfig::input_features() const {
  return domain == Domain::kTime ? input_window
                                 : 2 * (input_window / 2 + 1);
}

int DrnConfig::output_features() const {
  return domain == Domain::kTime ? output_window
                                 : 2 * (output_window / 2 + 1);
}

int DrnConfig::framewise_fusions() const {
  return uses_framewise() ? std::min(framewise_hidden_layers, lstm_layers) : 0;
}

dsp::WindowPair DrnConfig::OutputWindows() const {
  const auto kind = output_window == shift ? dsp::WindowKind::kRectangular
                                           : dsp::WindowKind::kSqrtHann;
  return dsp::MakeWindowPair(kind, output_window, shift);
}

void DrnConfig::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("DrnConfig: ") + what);
  };
  require(channels >= 1, "channels must be >= 1");
  require(shift >= 1, "shift R must be >= 1");
  require(input_window >= shift, "iW must be >= R");
  require(output_window >= shift, "oW must be >= R");
  require(hidden >= 1, "H must be >= 1");
  require(lstm_layers >= 1, "need at least one LSTM layer");
  require(framewise_hidden_layers >= 1, "frame-wise network needs >= 1 layer");
  require(sample_rate > 0, "sample rate must be positive");
  if (uses_channelwise()) require(channel_embed >= 1, "E_C must be >= 1");
  if (uses_framewise()) require(frame_embed >= 1, "E_f must be >= 1");
  if (domain == Domain::kFrequency) {
    require(input_window % 2 == 0 && output_window % 2 == 0,
            "frequency domain needs even iW and oW");
  }
  grid.Validate();
  OutputWindows();
}

void to_json(nlohmann::json& j, const DrnConfig& c) {
  j = nlohmann::json{{"channels", c.channels},
                     {"shift", c.shift},
                     {"input_window", c.input_window},
                     {"output_window", c.output_window},
                     {"hidden", c.hidden},
                     {"channel_embed", c.channel_embed},
                     {"frame_embed", c.frame_embed},
                     {"lstm_layers", c.lstm_layers},
                     {"framewise_hidden_layers", c.framewise_hidden_layers},
                     {"sample_rate", c.sample_rate},
                     {"azimuth_bins", c.grid.azimuth_bins},
                     {"elevation_bins", c.grid.elevation_bins},
                     {"domain", ToString(c.domain)},
                     {"embedding", ToString(c.embedding)},
                     {"fusion", ToString(c.fusion)}};
}

void from_json(const nlohmann::json& j, DrnConfig& c) {
  static const char* kKeys[] = {
      "channels",      "shift",         "input_window", "output_window",
      "hidden",        "channel_embed", "frame_embed",  "lstm_layers",
      "framewise_hidden_layers",        "sample_rate",  "azimuth_bins",
      "elevation_bins", "domain",       "embedding",    "fusion"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(std::begin(kKeys), std::end(kKeys), it.key()) ==
        std::end(kKeys)) {
      throw std::invalid_argument("unknown model config key: " + it.key());
    }
  }
  DrnConfig d;
  c.channels = j.value("channels", d.channels);
  c.shift = j.value("shift", d.shift);
  c.input_window = j.value("input_window", d.input_window);
  c.output_window = j.value("output_window", d.output_window);
  c.hidden = j.value("hidden", d.hidden);
  c.channel_embed = j.value("channel_embed", d.channel_embed);
  c.frame_embed = j.value("frame_embed", d.frame_embed);
  c.lstm_layers = j.value("lstm_layers", d.lstm_layers);
  c.framewise_hidden_layers =
      j.value("framewise_hidden_layers", d.framewise_hidden_layers);
  c.sample_rate = j.value("sample_rate", d.sample_rate);
  c.grid.azimuth_bins = j.value("azimuth_bins", d.grid.azimuth_bins);
  c.grid.elevation_bins = j.value("elevation_bins", d.grid.elevation_bins);
  c.domain = DomainFromString(j.value("domain", ToString(d.domain)));
  c.embedding =
      EmbeddingModeFromString(j.value("embedding", ToString(d.embedding)));
  c.fusion = FusionModeFromString(j.value("fusion", ToString(d.fusion)));
}

}  // namespace drn::model
