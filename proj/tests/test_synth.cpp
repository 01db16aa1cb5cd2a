#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fallsentry/fall_detector.hpp"
#include "fallsentry/synth.hpp"
#include "support/oracles.hpp"

using namespace fallsentry;

namespace {

double max_nose_excursion(const std::vector<PoseFrame>& frames) {
  const auto& n0 = (*frames.front().landmarks)[0];
  double worst = 0.0;
  for (const auto& f : frames) {
    const auto& n = (*f.landmarks)[0];
    worst = std::max(worst, std::hypot(n.x - n0.x, n.y - n0.y));
  }
  return worst;
}

std::size_t count_falls(const std::vector<PoseFrame>& frames, double threshold = 95.0) {
  std::size_t n = 0;
  for (const auto& r : run_stream(StreamHeader{}, frames, {threshold, 0.5})) n += r.fall;
  return n;
}

}  // namespace

TEST(Synthesize, ShapeOfOutput) {
  SynthSpec spec;
  const auto frames = synthesize(spec, StreamHeader{});
  ASSERT_EQ(frames.size(), 100u);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    EXPECT_EQ(frames[i].index, static_cast<std::int64_t>(i));
    ASSERT_TRUE(frames[i].has_pose());
    for (const auto& p : *frames[i].landmarks) EXPECT_EQ(p.visibility, 1.0);
  }
  // Upright at the start: head above shoulders, ankles below.
  const auto& f0 = frames.front();
  EXPECT_LT(f0.at(KeypointId::NOSE).y, f0.at(KeypointId::LEFT_SHOULDER).y);
  EXPECT_GT(f0.at(KeypointId::LEFT_ANKLE).y, f0.at(KeypointId::LEFT_SHOULDER).y);
}

TEST(Synthesize, Deterministic) {
  SynthSpec spec;
  spec.pattern = SynthPattern::RIGHT_FALL;
  spec.seed = 1234;
  EXPECT_EQ(synthesize(spec, StreamHeader{}), synthesize(spec, StreamHeader{}));
  SynthSpec other = spec;
  other.seed = 1235;
  EXPECT_NE(synthesize(spec, StreamHeader{}), synthesize(other, StreamHeader{}));
}

TEST(Synthesize, WalkStaysWithinSway) {
  SynthSpec spec;
  spec.pattern = SynthPattern::NO_FALL_WALK;
  spec.frames = 100;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    spec.seed = seed;
    const auto frames = synthesize(spec, StreamHeader{});
    const double excursion = max_nose_excursion(frames);
    EXPECT_LE(excursion, spec.sway_px + 1e-9);
    EXPECT_LT(excursion, spec.drop_px);
    EXPECT_GT(excursion, 0.0);
  }
}

TEST(Synthesize, SitStaysWithinSway) {
  SynthSpec spec;
  spec.pattern = SynthPattern::NO_FALL_SIT;
  spec.sway_px = 40;
  const auto frames = synthesize(spec, StreamHeader{});
  EXPECT_NEAR(max_nose_excursion(frames), 40.0, 1e-9);
  EXPECT_EQ(count_falls(frames), 0u);
}

TEST(Synthesize, ForwardFallClosedForm) {
  SynthSpec spec;
  spec.pattern = SynthPattern::FORWARD_FALL;
  spec.frames = 120;
  spec.fall_start = 50;
  spec.drop_px = 150;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    spec.seed = seed;
    const auto frames = synthesize(spec, StreamHeader{});
    const auto results = run_stream(StreamHeader{}, frames, DetectorConfig{});
    const auto oracle = fallsentry::testing::brute_force_flags(frames, 95.0, 0.5);
    std::int64_t first = -1;
    for (std::size_t i = 0; i < results.size(); ++i) {
      ASSERT_EQ(results[i].fall, oracle[i]);
      if (results[i].fall && first < 0) first = results[i].index;
    }
    EXPECT_EQ(first, fallsentry::testing::closed_form_first_fall(spec, 95.0));
    EXPECT_EQ(first, 70);
  }
}

TEST(Synthesize, DisplacementFollowsRamp) {
  for (auto pattern : {SynthPattern::FORWARD_FALL, SynthPattern::BACKWARD_FALL,
                       SynthPattern::LEFT_FALL, SynthPattern::RIGHT_FALL}) {
    SynthSpec spec;
    spec.pattern = pattern;
    spec.fall_start = 10;
    spec.ramp_frames = 20;
    spec.drop_px = 123.0;
    const auto frames = synthesize(spec, StreamHeader{});
    const auto& n0 = (*frames[0].landmarks)[0];
    for (const auto& f : frames) {
      const auto& n = (*f.landmarks)[0];
      const double k = std::clamp<double>(static_cast<double>(f.index - 10), 0.0, 20.0);
      EXPECT_NEAR(std::hypot(n.x - n0.x, n.y - n0.y), 123.0 * k / 20.0, 1e-9)
          << to_string(pattern) << " frame " << f.index;
    }
  }
}

TEST(Synthesize, LeftAndRightFallsTiltTheHead) {
  for (auto pattern : {SynthPattern::LEFT_FALL, SynthPattern::RIGHT_FALL}) {
    SynthSpec spec;
    spec.pattern = pattern;
    const auto frames = synthesize(spec, StreamHeader{});
    const auto results = run_stream(StreamHeader{}, frames, DetectorConfig{});
    EXPECT_NEAR(*results.front().features.head_angle_deg, 90.0, 5.0);
    const double end = *results.back().features.head_angle_deg;
    EXPECT_TRUE(end < 30.0 || end > 150.0) << to_string(pattern) << " " << end;
    EXPECT_LT(*results.back().features.pct_change, 0.0);
  }
}

TEST(Synthesize, InvalidSpec) {
  auto code = [](SynthSpec s) {
    try {
      synthesize(s, StreamHeader{});
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  SynthSpec s;
  s.frames = 0;
  EXPECT_EQ(code(s), ErrorCode::InvalidSpec);
  s = {};
  s.fall_start = s.frames;
  EXPECT_EQ(code(s), ErrorCode::InvalidSpec);
  s = {};
  s.drop_px = -1;
  EXPECT_EQ(code(s), ErrorCode::InvalidSpec);
  s = {};
  s.ramp_frames = 0;
  EXPECT_EQ(code(s), ErrorCode::InvalidSpec);
  s = {};
  s.pattern = SynthPattern::NO_FALL_WALK;
  s.fall_start = 500;  // unused by the walk pattern
  EXPECT_NO_THROW(synthesize(s, StreamHeader{}));
}

TEST(Synthesize, FallVersusNoFallProperty) {
  std::mt19937_64 gen(424242);
  for (int i = 0; i < 200; ++i) {
    SynthSpec spec = fallsentry::testing::random_synth_spec(gen);
    const double threshold = 95.0;
    if (is_fall(spec.pattern)) {
      spec.drop_px = std::max(spec.drop_px, threshold + 1.0);
      spec.fall_start = std::min(spec.fall_start, spec.frames - 1 - spec.ramp_frames);
      if (spec.fall_start < 0) {
        spec.fall_start = 0;
        spec.ramp_frames = std::max<std::int64_t>(1, spec.frames - 1);
      }
      EXPECT_GE(count_falls(synthesize(spec, StreamHeader{}), threshold), 1u) << spec.describe();
    } else {
      spec.sway_px = std::min(spec.sway_px, threshold - 1.0);
      EXPECT_EQ(count_falls(synthesize(spec, StreamHeader{}), threshold), 0u) << spec.describe();
    }
  }
}

TEST(Synthesize, PatternNames) {
  for (auto p : {SynthPattern::FORWARD_FALL, SynthPattern::BACKWARD_FALL, SynthPattern::LEFT_FALL,
                 SynthPattern::RIGHT_FALL, SynthPattern::NO_FALL_WALK, SynthPattern::NO_FALL_SIT}) {
    EXPECT_EQ(pattern_from_string(to_string(p)), p);
  }
  EXPECT_FALSE(pattern_from_string("sideways").has_value());
}

TEST(SynthesizeStream, EchoesSpecInSource) {
  SynthSpec spec;
  spec.seed = 77;
  const auto s = synthesize_stream(spec, StreamHeader{});
  EXPECT_NE(s.header.source.find("pattern=forward-fall"), std::string::npos);
  EXPECT_NE(s.header.source.find("seed=77"), std::string::npos);
  EXPECT_NE(s.header.source.find(kRngAlgorithm), std::string::npos);
}

TEST(Perturb, Identity) {
  const auto frames = synthesize(SynthSpec{}, StreamHeader{});
  EXPECT_EQ(perturb(frames, {0.0, 0.0, 9}), frames);
}

TEST(Perturb, FullDropout) {
  const auto frames = synthesize(SynthSpec{}, StreamHeader{});
  const auto out = perturb(frames, {1.0, 1.0, 9});
  ASSERT_EQ(out.size(), frames.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_FALSE(out[i].has_pose());
    EXPECT_EQ(out[i].index, frames[i].index);
  }
}

TEST(Perturb, NoiseMeanWithinThreeSigmaOverRootN) {
  SynthSpec spec;
  spec.frames = 304;  // 304 * 33 >= 10^4 landmarks
  const auto frames = synthesize(spec, StreamHeader{});
  const double sigma = 2.0;
  const auto noisy = perturb(frames, {sigma, 0.0, 2718});
  const std::size_t n = 10000;
  double sum = 0.0, sum_sq = 0.0;
  std::size_t taken = 0;
  for (std::size_t i = 0; i < frames.size() && taken < n; ++i) {
    for (std::size_t k = 0; k < kLandmarkCount && taken < n; ++k, ++taken) {
      const double off = (*noisy[i].landmarks)[k].x - (*frames[i].landmarks)[k].x;
      sum += off;
      sum_sq += off * off;
    }
  }
  ASSERT_EQ(taken, n);
  const double mean = sum / n;
  EXPECT_LT(std::abs(mean), 3.0 * sigma / std::sqrt(static_cast<double>(n)));
  EXPECT_NEAR(std::sqrt(sum_sq / n - mean * mean), sigma, 0.1 * sigma);
}

TEST(Perturb, DeterministicAndCountPreserving) {
  std::mt19937_64 gen(5);
  for (int i = 0; i < 20; ++i) {
    const auto frames = synthesize(fallsentry::testing::random_synth_spec(gen), StreamHeader{});
    const PerturbSpec p{3.0, 0.3, gen()};
    const auto a = perturb(frames, p);
    EXPECT_EQ(a, perturb(frames, p));
    ASSERT_EQ(a.size(), frames.size());
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].index, frames[k].index);
  }
}

TEST(Perturb, InvalidSpecAndSourceEcho) {
  const std::vector<PoseFrame> none;
  EXPECT_THROW(perturb(none, {-1.0, 0.0, 0}), Error);
  EXPECT_THROW(perturb(none, {0.0, 1.5, 0}), Error);
  PoseStream s{StreamHeader{640, 480, 30.0, "orig"}, {}};
  EXPECT_EQ(perturb_stream(s, {1.0, 0.5, 3}).header.source.rfind("orig | perturb", 0), 0u);
}
