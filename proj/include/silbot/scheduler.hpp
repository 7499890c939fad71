#pragma once

// Activation schedules and tie-break policies, i.e. the adversary.
//
// Randomised schedulers draw from SplitMix64 (64-bit state, Steele/Lea/Flood
// 2014) so that a seed yields the same schedule on every platform:
//   state += 0x9E3779B97F4A7C15
//   z = state; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB; return z ^ (z >> 31)
// below(n) = next() % n, unit() = (next() >> 11) * 2^-53, and shuffles are
// Fisher-Yates from the last index down using below(i + 1).

#include <charconv>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "silbot/engine.hpp"

namespace silbot {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t below(std::uint64_t n) { return next() % n; }

  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::uint64_t state_;
};

class FullySync final : public Scheduler {
 public:
  std::vector<ParticleId> next(const RunState& s) override {
    std::vector<ParticleId> all(s.n());
    std::iota(all.begin(), all.end(), ParticleId{0});
    return all;
  }
};

// One particle per round; each epoch is a fresh random permutation of all ids.
class SerialRandom final : public Scheduler {
 public:
  explicit SerialRandom(std::uint64_t seed) : rng_(seed) {}

  std::vector<ParticleId> next(const RunState& s) override {
    if (cursor_ >= epoch_.size()) {
      epoch_.resize(s.n());
      std::iota(epoch_.begin(), epoch_.end(), ParticleId{0});
      rng_.shuffle(epoch_);
      cursor_ = 0;
    }
    return {epoch_[cursor_++]};
  }

 private:
  SplitMix64 rng_;
  std::vector<ParticleId> epoch_;
  std::size_t cursor_ = 0;
};

// Each particle independently with probability p; an empty draw is redrawn.
// A particle idle for window-1 rounds is added so no fairness window is missed.
class SubsetRandom final : public Scheduler {
 public:
  SubsetRandom(std::uint64_t seed, double p, std::uint64_t window = 0)
      : rng_(seed), p_(p), window_(window) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("subset probability must be in (0, 1]");
  }

  std::vector<ParticleId> next(const RunState& s) override {
    const std::uint64_t window = window_ ? window_ : 2 * static_cast<std::uint64_t>(s.n());
    if (last_.size() != s.n()) last_.assign(s.n(), s.step_count);
    const std::uint64_t round = s.step_count + 1;
    std::vector<ParticleId> out;
    do {
      out.clear();
      for (ParticleId id = 0; id < s.n(); ++id) {
        if (rng_.unit() < p_) out.push_back(id);
      }
    } while (out.empty());
    for (ParticleId id = 0; id < s.n(); ++id) {
      if (round - last_[id] >= window && !std::binary_search(out.begin(), out.end(), id)) {
        out.insert(std::upper_bound(out.begin(), out.end(), id), id);
      }
    }
    for (ParticleId id : out) last_[id] = round;
    return out;
  }

 private:
  SplitMix64 rng_;
  double p_;
  std::uint64_t window_;
  std::vector<std::uint64_t> last_;
};

// Activation sets supplied from outside (a session client, a test script).
class ExternalScheduler final : public Scheduler {
 public:
  using Source = std::function<std::vector<ParticleId>(const RunState&)>;
  explicit ExternalScheduler(Source source) : source_(std::move(source)) {}

  std::vector<ParticleId> next(const RunState& s) override { return source_(s); }
  bool enforces_fairness() const override { return false; }

 private:
  Source source_;
};

class FirstById final : public Adversary {
 public:
  ParticleId choose(const ConflictGroup& group) override {
    if (group.members.empty()) throw EngineError("empty conflict group");
    return *std::min_element(group.members.begin(), group.members.end());
  }
};

class RandomChoice final : public Adversary {
 public:
  explicit RandomChoice(std::uint64_t seed) : rng_(seed) {}

  ParticleId choose(const ConflictGroup& group) override {
    if (group.members.empty()) throw EngineError("empty conflict group");
    return group.members[rng_.below(group.members.size())];
  }

 private:
  SplitMix64 rng_;
};

class ExternalAdversary final : public Adversary {
 public:
  using Source = std::function<ParticleId(const ConflictGroup&)>;
  explicit ExternalAdversary(Source source) : source_(std::move(source)) {}

  ParticleId choose(const ConflictGroup& group) override {
    if (group.members.empty()) throw EngineError("empty conflict group");
    const ParticleId id = source_(group);
    if (!group.contains(id)) throw EngineError("external choice is not in the conflict group");
    return id;
  }

 private:
  Source source_;
};

// "sync", "serial:SEED", "subset:SEED:P", "external"
struct SchedulerSpec {
  enum class Kind : std::uint8_t { sync, serial, subset, external };
  Kind kind = Kind::sync;
  std::uint64_t seed = 0;
  double p = 0.5;

  std::string to_string() const {
    switch (kind) {
      case Kind::sync: return "sync";
      case Kind::serial: return "serial:" + std::to_string(seed);
      case Kind::subset: {
        char buf[32];
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, p);
        return "subset:" + std::to_string(seed) + ":" + std::string(buf, end);
      }
      case Kind::external: return "external";
    }
    return "?";
  }
};

// "first", "random:SEED", "external"
struct AdversarySpec {
  enum class Kind : std::uint8_t { first, random, external };
  Kind kind = Kind::first;
  std::uint64_t seed = 0;

  std::string to_string() const {
    switch (kind) {
      case Kind::first: return "first";
      case Kind::random: return "random:" + std::to_string(seed);
      case Kind::external: return "external";
    }
    return "?";
  }
};

namespace detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::uint64_t parse_seed(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::invalid_argument("bad seed '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace detail

// A missing seed falls back to `default_seed`.
inline SchedulerSpec parse_scheduler_spec(std::string_view text, std::uint64_t default_seed = 0) {
  const auto parts = detail::split(text, ':');
  SchedulerSpec spec;
  spec.seed = default_seed;
  const std::string_view head = parts[0];
  if (head == "sync" && parts.size() == 1) {
    spec.kind = SchedulerSpec::Kind::sync;
  } else if (head == "external" && parts.size() == 1) {
    spec.kind = SchedulerSpec::Kind::external;
  } else if (head == "serial" && parts.size() <= 2) {
    spec.kind = SchedulerSpec::Kind::serial;
    if (parts.size() == 2) spec.seed = detail::parse_seed(parts[1]);
  } else if (head == "subset" && parts.size() >= 2 && parts.size() <= 3) {
    spec.kind = SchedulerSpec::Kind::subset;
    spec.seed = detail::parse_seed(parts[1]);
    if (parts.size() == 3) {
      try {
        std::size_t used = 0;
        spec.p = std::stod(std::string(parts[2]), &used);
        if (used != parts[2].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw std::invalid_argument("bad subset probability '" + std::string(parts[2]) + "'");
      }
    }
    if (!(spec.p > 0.0 && spec.p <= 1.0)) {
      throw std::invalid_argument("subset probability must be in (0, 1]");
    }
  } else {
    throw std::invalid_argument("unknown scheduler spec '" + std::string(text) + "'");
  }
  return spec;
}

inline AdversarySpec parse_adversary_spec(std::string_view text, std::uint64_t default_seed = 0) {
  const auto parts = detail::split(text, ':');
  AdversarySpec spec;
  spec.seed = default_seed;
  if (parts[0] == "first" && parts.size() == 1) {
    spec.kind = AdversarySpec::Kind::first;
  } else if (parts[0] == "external" && parts.size() == 1) {
    spec.kind = AdversarySpec::Kind::external;
  } else if (parts[0] == "random" && parts.size() <= 2) {
    spec.kind = AdversarySpec::Kind::random;
    if (parts.size() == 2) spec.seed = detail::parse_seed(parts[1]);
  } else {
    throw std::invalid_argument("unknown adversary spec '" + std::string(text) + "'");
  }
  return spec;
}

inline std::unique_ptr<Scheduler> make_scheduler(const SchedulerSpec& spec,
                                                 std::uint64_t fairness_window = 0,
                                                 ExternalScheduler::Source external = {}) {
  switch (spec.kind) {
    case SchedulerSpec::Kind::sync: return std::make_unique<FullySync>();
    case SchedulerSpec::Kind::serial: return std::make_unique<SerialRandom>(spec.seed);
    case SchedulerSpec::Kind::subset:
      return std::make_unique<SubsetRandom>(spec.seed, spec.p, fairness_window);
    case SchedulerSpec::Kind::external:
      if (!external) throw std::invalid_argument("external scheduler needs an activation source");
      return std::make_unique<ExternalScheduler>(std::move(external));
  }
  return nullptr;
}

inline std::unique_ptr<Adversary> make_adversary(const AdversarySpec& spec,
                                                 ExternalAdversary::Source external = {}) {
  switch (spec.kind) {
    case AdversarySpec::Kind::first: return std::make_unique<FirstById>();
    case AdversarySpec::Kind::random: return std::make_unique<RandomChoice>(spec.seed);
    case AdversarySpec::Kind::external:
      if (!external) throw std::invalid_argument("external adversary needs a choice source");
      return std::make_unique<ExternalAdversary>(std::move(external));
  }
  return nullptr;
}

inline Trace run(const Configuration& c0, const SchedulerSpec& sched, const AdversarySpec& adv,
                 const RunLimits& limits = {}) {
  auto scheduler = make_scheduler(sched, limits.fairness_window);
  auto adversary = make_adversary(adv);
  return run(c0, *scheduler, *adversary, limits, sched.to_string(), adv.to_string());
}

}  // namespace silbot
