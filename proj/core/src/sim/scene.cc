#include "drn/sim/scene.h"

#include <algorithm>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace drn::sim {

namespace {

constexpr uint64_t kSceneStream = 0x5ce2e;

template <typename E>
E FromString(const std::string& s, std::initializer_list<std::pair<E, const char*>> table,
             const char* what) {
  for (const auto& [e, name] : table) {
    if (s == name) return e;
  }
  throw std::invalid_argument(std::string("unknown ") + what + ": " + s);
}

Vec3 UniformInRoom(const RoomSpec& room, double margin, Rng& rng) {
  return {rng.Uniform(margin, room.length - margin),
          rng.Uniform(margin, room.width - margin),
          rng.Uniform(margin, room.height - margin)};
}

std::string Fmt(double v) {
  std::ostringstream o;
  o << v;
  return o.str();
}

}  // namespace

std::string ToString(SceneMode m) {
  switch (m) {
    case SceneMode::kStandard: return "standard";
    case SceneMode::kEasy: return "easy";
    case SceneMode::kSwitchDemo: return "switch_demo";
  }
  return "standard";
}

std::string ToString(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

SceneMode SceneModeFromString(const std::string& s) {
  return FromString<SceneMode>(s,
                               {{SceneMode::kStandard, "standard"},
                                {SceneMode::kEasy, "easy"},
                                {SceneMode::kSwitchDemo, "switch_demo"}},
                               "scene mode");
}

Split SplitFromString(const std::string& s) {
  return FromString<Split>(
      s, {{Split::kTrain, "train"}, {Split::kVal, "val"}, {Split::kTest, "test"}},
      "split");
}

void SceneConfig::Validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("SceneConfig: " + what);
  };
  require(clip_seconds > 0 && sample_rate > 0, "clip and rate must be positive");
  require(channels >= 1 && array_radius >= 0, "bad array");
  require(room_length.min > 2 * wall_margin && room_width.min > 2 * wall_margin &&
              room_height.min > 2 * wall_margin,
          "rooms must exceed twice the wall margin");
  require(room_length.min <= room_length.max && room_width.min <= room_width.max &&
              room_height.min <= room_height.max,
          "empty room range");
  require(absorption.min >= 0 && absorption.max <= 1 &&
              absorption.min <= absorption.max,
          "absorption must lie in [0, 1]");
  require(targets_min >= 1 && targets_min <= targets_max, "bad target count");
  require(interferers_min >= 0 && interferers_min <= interferers_max,
          "bad interferer count");
  require(noises_min >= 0 && noises_min <= noises_max, "bad noise count");
  require(interferer_probability >= 0 && interferer_probability <= 1,
          "interferer probability must be in [0, 1]");
  require(max_switches >= 0 && max_switches <= 2, "max_switches must be 0..2");
  require(switch_jitter >= 0 && switch_jitter < 0.5, "bad switch jitter");
  require(ism_order >= 0, "ism_order must be >= 0");
  require(max_retries >= 1 && placement_tries >= 1, "retry counts must be >= 1");
  require(doa_hop >= 1, "doa_hop must be >= 1");
}

SceneConfig ApplyMode(SceneConfig c, SceneMode mode) {
  switch (mode) {
    case SceneMode::kStandard:
      break;
    case SceneMode::kEasy:
      c.targets_min = c.targets_max = 1;
      c.interferer_probability = 0.0;
      break;
    case SceneMode::kSwitchDemo:
      c.targets_min = c.targets_max = 2;
      c.max_switches = 1;
      c.interferer_probability = 0.0;
      c.noises_min = c.noises_max = 1;
      c.absorption = {1.0, 1.0};
      break;
  }
  return c;
}

std::vector<SwitchEvent> MakeSwitchSchedule(int num_talkers, int n_switches,
                                            int clip_samples, ScheduleMode mode,
                                            Rng& rng, double jitter) {
  if (num_talkers < 1) throw std::invalid_argument("schedule: no talkers");
  if (n_switches < 0 || n_switches > num_talkers - 1) {
    throw std::invalid_argument("schedule: " + std::to_string(n_switches) +
                                " switches need at least " +
                                std::to_string(n_switches + 1) + " talkers");
  }
  if (clip_samples < n_switches + 1) {
    throw std::invalid_argument("schedule: clip too short");
  }
  std::vector<int> order(num_talkers);
  std::iota(order.begin(), order.end(), 0);
  for (int i = num_talkers - 1; i > 0; --i) {
    std::swap(order[i], order[rng.UniformInt(0, i)]);
  }
  std::vector<SwitchEvent> events{{0, order[0]}};
  for (int i = 1; i <= n_switches; ++i) {
    double t = static_cast<double>(i) * clip_samples / (n_switches + 1);
    if (mode == ScheduleMode::kTrain) {
      t += rng.Uniform(-jitter, jitter) * clip_samples;
    }
    const int s = std::clamp(static_cast<int>(std::lround(t)),
                             events.back().sample + 1, clip_samples - 1);
    events.push_back({s, order[i]});
  }
  return events;
}

int ActiveTalker(const std::vector<SwitchEvent>& schedule, int sample) {
  if (schedule.empty()) throw std::invalid_argument("empty schedule");
  int talker = schedule.front().talker;
  for (const auto& e : schedule) {
    if (e.sample <= sample) talker = e.talker;
  }
  return talker;
}

std::vector<Doa> SceneSpec::TargetDoas() const {
  std::vector<Doa> out;
  for (const auto& t : targets) out.push_back(DoaOf(t, array));
  return out;
}

SceneSpec SampleScene(uint64_t seed, const SceneConfig& base, SceneMode mode,
                      Split split) {
  const SceneConfig cfg = ApplyMode(base, mode);
  cfg.Validate();
  Rng rng = Rng::ForStream(seed, kSceneStream);
  SceneSpec s;
  s.seed = seed;
  s.mode = mode;
  s.split = split;
  s.samples = cfg.clip_samples();
  s.sample_rate = cfg.sample_rate;
  s.nominal_level_dbfs = cfg.nominal_level_dbfs;

  // Counts and presence are drawn once so that room rejection cannot bias
  // them.
  const int K = rng.UniformInt(cfg.targets_min, cfg.targets_max);
  s.interferers_present = rng.Bernoulli(cfg.interferer_probability);
  const int n_int = s.interferers_present
                        ? rng.UniformInt(cfg.interferers_min, cfg.interferers_max)
                        : 0;
  const int n_noise = rng.UniformInt(cfg.noises_min, cfg.noises_max);

  const auto local = ArrayGeometry::Circular(cfg.channels, cfg.array_radius);
  const double array_margin = cfg.wall_margin + local.MaxRadius();
  bool placed = false;
  for (int attempt = 0; attempt < cfg.max_retries && !placed; ++attempt) {
    s.retries = attempt;
    s.room.length = rng.Uniform(cfg.room_length.min, cfg.room_length.max);
    s.room.width = rng.Uniform(cfg.room_width.min, cfg.room_width.max);
    s.room.height = rng.Uniform(cfg.room_height.min, cfg.room_height.max);
    s.room.absorption = rng.Uniform(cfg.absorption.min, cfg.absorption.max);
    s.array = local;
    s.array.yaw_deg = rng.Uniform(0.0, 360.0);
    s.array.center = UniformInRoom(s.room, array_margin, rng);
    s.targets.clear();
    s.interferers.clear();
    s.noises.clear();

    auto place = [&](auto accept) -> std::optional<Vec3> {
      for (int t = 0; t < cfg.placement_tries; ++t) {
        const Vec3 p = UniformInRoom(s.room, cfg.wall_margin, rng);
        if (accept(p)) return p;
      }
      return std::nullopt;
    };
    bool ok = true;
    std::vector<double> azimuths;
    for (int k = 0; k < K && ok; ++k) {
      auto p = place([&](const Vec3& p) {
        const double d = (p - s.array.center).Norm();
        if (!cfg.target_distance.Contains(d, 0.0)) return false;
        const double az = DoaOf(p, s.array).azimuth_deg;
        for (double other : azimuths) {
          if (AzimuthSeparation(az, other) < cfg.min_target_separation_deg) {
            return false;
          }
        }
        return true;
      });
      if (!p) {
        ok = false;
        break;
      }
      s.targets.push_back(*p);
      azimuths.push_back(DoaOf(*p, s.array).azimuth_deg);
    }
    for (int i = 0; i < n_int && ok; ++i) {
      auto p = place([&](const Vec3& p) {
        return (p - s.array.center).Norm() >= cfg.interferer_min_distance;
      });
      if (!p) ok = false;
      else s.interferers.push_back(*p);
    }
    for (int i = 0; i < n_noise && ok; ++i) {
      auto p = place([&](const Vec3& p) {
        return (p - s.array.center).Norm() >= cfg.noise_min_distance;
      });
      if (!p) ok = false;
      else s.noises.push_back(*p);
    }
    placed = ok;
  }
  if (!placed) {
    throw std::runtime_error("scene " + std::to_string(seed) +
                             ": no valid placement after " +
                             std::to_string(cfg.max_retries) + " rooms");
  }

  for (int k = 0; k < K; ++k) {
    s.target_level_db.push_back(
        rng.Uniform(cfg.target_level_db.min, cfg.target_level_db.max));
  }
  for (int i = 0; i < n_int; ++i) {
    s.interferer_level_db.push_back(
        rng.Uniform(cfg.interferer_level_db.min, cfg.interferer_level_db.max));
  }
  for (int i = 0; i < n_noise; ++i) {
    s.noise_level_db.push_back(
        rng.Uniform(cfg.noise_level_db.min, cfg.noise_level_db.max));
  }
  s.sir_db = rng.Uniform(cfg.sir_db.min, cfg.sir_db.max);
  s.snr_db = rng.Uniform(cfg.snr_db.min, cfg.snr_db.max);

  const int max_sw = std::min(cfg.max_switches, K - 1);
  s.n_switches = mode == SceneMode::kSwitchDemo ? 1 : rng.UniformInt(0, max_sw);
  s.schedule = MakeSwitchSchedule(
      K, s.n_switches, s.samples,
      split == Split::kTrain ? ScheduleMode::kTrain : ScheduleMode::kTest, rng,
      cfg.switch_jitter);
  return s;
}

std::vector<std::string> CheckSceneConstraints(const SceneSpec& s,
                                               const SceneConfig& base) {
  const SceneConfig cfg = ApplyMode(base, s.mode);
  std::vector<std::string> v;
  auto fail = [&](const std::string& what) { v.push_back(what); };
  const auto& r = s.room;
  if (!cfg.room_length.Contains(r.length) || !cfg.room_width.Contains(r.width) ||
      !cfg.room_height.Contains(r.height)) {
    fail("room dimensions out of range");
  }
  if (!cfg.absorption.Contains(r.absorption)) fail("absorption out of range");
  if (s.array.channels() != cfg.channels) fail("wrong channel count");
  for (const auto& m : s.array.Positions()) {
    if (r.WallDistance(m) < cfg.wall_margin - 1e-9) {
      fail("microphone closer than " + Fmt(cfg.wall_margin) + " m to a wall");
    }
  }
  const int K = static_cast<int>(s.targets.size());
  if (K < cfg.targets_min || K > cfg.targets_max) fail("target count");
  auto check_source = [&](const Vec3& p, const std::string& name) {
    if (!r.Contains(p)) fail(name + " outside room");
    if (r.WallDistance(p) < cfg.wall_margin - 1e-9) fail(name + " too close to wall");
  };
  for (int k = 0; k < K; ++k) {
    const std::string name = "target " + std::to_string(k);
    check_source(s.targets[k], name);
    const double d = (s.targets[k] - s.array.center).Norm();
    if (!cfg.target_distance.Contains(d)) fail(name + " distance " + Fmt(d));
    for (int j = 0; j < k; ++j) {
      const double sep = AzimuthSeparation(DoaOf(s.targets[k], s.array).azimuth_deg,
                                           DoaOf(s.targets[j], s.array).azimuth_deg);
      if (sep < cfg.min_target_separation_deg - 1e-9) {
        fail("targets " + std::to_string(j) + "/" + std::to_string(k) +
             " separated by " + Fmt(sep) + " deg");
      }
    }
  }
  const int I = static_cast<int>(s.interferers.size());
  if (s.interferers_present) {
    if (I < cfg.interferers_min || I > cfg.interferers_max) fail("interferer count");
  } else if (I != 0) {
    fail("interferers placed although absent");
  }
  for (int i = 0; i < I; ++i) {
    check_source(s.interferers[i], "interferer " + std::to_string(i));
    if ((s.interferers[i] - s.array.center).Norm() <
        cfg.interferer_min_distance - 1e-9) {
      fail("interferer " + std::to_string(i) + " too close to array");
    }
  }
  const int Nn = static_cast<int>(s.noises.size());
  if (Nn < cfg.noises_min || Nn > cfg.noises_max) fail("noise source count");
  for (int i = 0; i < Nn; ++i) {
    check_source(s.noises[i], "noise " + std::to_string(i));
    if ((s.noises[i] - s.array.center).Norm() < cfg.noise_min_distance - 1e-9) {
      fail("noise " + std::to_string(i) + " too close to array");
    }
  }
  if (static_cast<int>(s.target_level_db.size()) != K ||
      static_cast<int>(s.interferer_level_db.size()) != I ||
      static_cast<int>(s.noise_level_db.size()) != Nn) {
    fail("level list sizes do not match source counts");
  }
  for (double l : s.target_level_db) {
    if (!cfg.target_level_db.Contains(l)) fail("target level " + Fmt(l));
  }
  for (double l : s.interferer_level_db) {
    if (!cfg.interferer_level_db.Contains(l)) fail("interferer level " + Fmt(l));
  }
  for (double l : s.noise_level_db) {
    if (!cfg.noise_level_db.Contains(l)) fail("noise level " + Fmt(l));
  }
  if (!cfg.sir_db.Contains(s.sir_db)) fail("SIR " + Fmt(s.sir_db));
  if (!cfg.snr_db.Contains(s.snr_db)) fail("SNR " + Fmt(s.snr_db));

  // Switch schedule.
  const int n = s.n_switches;
  if (n < 0 || n > std::min(cfg.max_switches, K - 1)) fail("switch count");
  if (static_cast<int>(s.schedule.size()) != n + 1) {
    fail("schedule length");
  } else {
    if (s.schedule[0].sample != 0) fail("schedule must start at 0");
    std::vector<int> seen;
    for (int i = 0; i <= n; ++i) {
      const auto& e = s.schedule[i];
      if (e.talker < 0 || e.talker >= K) fail("schedule talker out of range");
      if (std::find(seen.begin(), seen.end(), e.talker) != seen.end()) {
        fail("schedule revisits a talker");
      }
      seen.push_back(e.talker);
      if (i == 0) continue;
      const double ideal = static_cast<double>(i) * s.samples / (n + 1);
      const double dev = std::abs(e.sample - ideal);
      const bool train = s.split == Split::kTrain;
      const double allowed = train ? cfg.switch_jitter * s.samples + 0.5 : 0.5;
      if (dev > allowed) {
        fail("switch " + std::to_string(i) + " deviates by " + Fmt(dev) +
             " samples");
      }
      if (e.sample <= s.schedule[i - 1].sample) fail("schedule not increasing");
    }
  }
  return v;
}

// ----------------------------------------------------------------- json

void to_json(nlohmann::json& j, const Range& r) { j = {r.min, r.max}; }
void from_json(const nlohmann::json& j, Range& r) {
  if (!j.is_array() || j.size() != 2) {
    throw std::invalid_argument("range must be [min, max]");
  }
  r = {j[0].get<double>(), j[1].get<double>()};
}

#define DRN_SCENE_CONFIG_FIELDS(X)                                           \
  X(clip_seconds) X(sample_rate) X(channels) X(array_radius) X(room_length)  \
  X(room_width) X(room_height) X(absorption) X(wall_margin) X(targets_min)   \
  X(targets_max) X(target_distance) X(min_target_separation_deg)             \
  X(interferer_probability) X(interferers_min) X(interferers_max)            \
  X(interferer_min_distance) X(noises_min) X(noises_max)                     \
  X(noise_min_distance) X(nominal_level_dbfs) X(target_level_db)             \
  X(noise_level_db) X(interferer_level_db) X(sir_db) X(snr_db)               \
  X(max_switches) X(switch_jitter) X(ism_order) X(max_retries)               \
  X(placement_tries) X(doa_hop)

void to_json(nlohmann::json& j, const SceneConfig& c) {
  j = nlohmann::json::object();
#define X(f) j[#f] = c.f;
  DRN_SCENE_CONFIG_FIELDS(X)
#undef X
}

void from_json(const nlohmann::json& j, SceneConfig& c) {
  const nlohmann::json known = SceneConfig{};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.contains(it.key())) {
      throw std::invalid_argument("unknown scene config key: " + it.key());
    }
  }
  c = SceneConfig{};
#define X(f) \
  if (j.contains(#f)) j.at(#f).get_to(c.f);
  DRN_SCENE_CONFIG_FIELDS(X)
#undef X
}

#undef DRN_SCENE_CONFIG_FIELDS

void to_json(nlohmann::json& j, const SwitchEvent& e) {
  j = {{"sample", e.sample}, {"talker", e.talker}};
}
void from_json(const nlohmann::json& j, SwitchEvent& e) {
  j.at("sample").get_to(e.sample);
  j.at("talker").get_to(e.talker);
}

void to_json(nlohmann::json& j, const SceneSpec& s) {
  j = {{"seed", s.seed},
       {"mode", ToString(s.mode)},
       {"split", ToString(s.split)},
       {"samples", s.samples},
       {"sample_rate", s.sample_rate},
       {"room", s.room},
       {"array", s.array},
       {"targets", s.targets},
       {"interferers", s.interferers},
       {"noises", s.noises},
       {"interferers_present", s.interferers_present},
       {"target_level_db", s.target_level_db},
       {"interferer_level_db", s.interferer_level_db},
       {"noise_level_db", s.noise_level_db},
       {"nominal_level_dbfs", s.nominal_level_dbfs},
       {"sir_db", s.sir_db},
       {"snr_db", s.snr_db},
       {"n_switches", s.n_switches},
       {"schedule", s.schedule},
       {"retries", s.retries}};
}

void from_json(const nlohmann::json& j, SceneSpec& s) {
  j.at("seed").get_to(s.seed);
  s.mode = SceneModeFromString(j.at("mode").get<std::string>());
  s.split = SplitFromString(j.at("split").get<std::string>());
  j.at("samples").get_to(s.samples);
  j.at("sample_rate").get_to(s.sample_rate);
  j.at("room").get_to(s.room);
  j.at("array").get_to(s.array);
  j.at("targets").get_to(s.targets);
  j.at("interferers").get_to(s.interferers);
  j.at("noises").get_to(s.noises);
  j.at("interferers_present").get_to(s.interferers_present);
  j.at("target_level_db").get_to(s.target_level_db);
  j.at("interferer_level_db").get_to(s.interferer_level_db);
  j.at("noise_level_db").get_to(s.noise_level_db);
  j.at("nominal_level_dbfs").get_to(s.nominal_level_dbfs);
  j.at("sir_db").get_to(s.sir_db);
  j.at("snr_db").get_to(s.snr_db);
  j.at("n_switches").get_to(s.n_switches);
  j.at("schedule").get_to(s.schedule);
  j.at("retries").get_to(s.retries);
}

}  // namespace drn::sim
