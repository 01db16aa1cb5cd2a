#include <gtest/gtest.h>

#include <random>

#include "fallsentry/evaluation.hpp"

using namespace fallsentry;

namespace {

std::vector<FrameResult> predictions(const std::vector<bool>& flags) {
  std::vector<FrameResult> out;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    FrameResult r;
    r.index = static_cast<std::int64_t>(i);
    r.fall = flags[i];
    r.annotation = flags[i] ? Annotation::RED_FALL : Annotation::GREEN_NO_FALL;
    out.push_back(r);
  }
  return out;
}

GroundTruthLabels frame_truth(const std::vector<bool>& labels, std::string id = "s") {
  std::map<std::int64_t, bool> m;
  for (std::size_t i = 0; i < labels.size(); ++i) m[static_cast<std::int64_t>(i)] = labels[i];
  return {std::move(id), m};
}

}  // namespace

TEST(Confuse, AllFall199) {
  const std::vector<bool> all(199, true);
  const auto cm = confuse(predictions(all), frame_truth(all));
  EXPECT_EQ(cm, (ConfusionMatrix{199, 0, 0, 0}));
}

TEST(Confuse, AllNegative) {
  const std::vector<bool> none(10, false);
  EXPECT_EQ(confuse(predictions(none), frame_truth(none)), (ConfusionMatrix{0, 0, 10, 0}));
}

TEST(Confuse, FourCells) {
  const auto cm = confuse(predictions({true, false, true, false}),
                          frame_truth({true, true, false, false}));
  EXPECT_EQ(cm, (ConfusionMatrix{1, 1, 1, 1}));
}

TEST(Confuse, MissingLabel) {
  try {
    confuse(predictions({true, true, true}), frame_truth({true, true}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingLabel);
  }
}

TEST(Confuse, VideoLevelAnyFrame) {
  const GroundTruthLabels fall{"v", true};
  const GroundTruthLabels adl{"v", false};
  EXPECT_EQ(confuse(predictions({false, true, false}), fall), (ConfusionMatrix{1, 0, 0, 0}));
  EXPECT_EQ(confuse(predictions({false, false}), fall), (ConfusionMatrix{0, 0, 0, 1}));
  EXPECT_EQ(confuse(predictions({false, false}), adl), (ConfusionMatrix{0, 0, 1, 0}));
  EXPECT_EQ(confuse(predictions({true}), adl), (ConfusionMatrix{0, 1, 0, 0}));
  try {
    confuse({}, fall);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyResults);
  }
}

TEST(Metrics, Examples) {
  const auto perfect = metrics({199, 0, 0, 0});
  EXPECT_EQ(perfect.accuracy, 1.0);
  EXPECT_EQ(perfect.sensitivity, 1.0);
  EXPECT_FALSE(perfect.specificity.has_value());

  const auto half = metrics({1, 1, 1, 1});
  EXPECT_EQ(half.accuracy, 0.5);
  EXPECT_EQ(half.sensitivity, 0.5);
  EXPECT_EQ(half.specificity, 0.5);

  // tp=93 fn=7 tn=89 fp=11: 93/100, 89/100, 182/200.
  const auto trio = metrics({93, 11, 89, 7});
  EXPECT_DOUBLE_EQ(*trio.sensitivity, 0.93);
  EXPECT_DOUBLE_EQ(*trio.specificity, 0.89);
  EXPECT_DOUBLE_EQ(trio.accuracy, 0.91);

  EXPECT_FALSE(metrics({0, 0, 5, 0}).sensitivity.has_value());
  try {
    metrics({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyMatrix);
  }
}

TEST(EvaluationProperties, TotalsAndSwapSymmetry) {
  std::mt19937_64 gen(3);
  std::bernoulli_distribution coin(0.5);
  for (int iter = 0; iter < 300; ++iter) {
    const std::size_t n = 1 + gen() % 80;
    std::vector<bool> pred(n), truth(n), npred(n), ntruth(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = coin(gen);
      truth[i] = coin(gen);
      npred[i] = !pred[i];
      ntruth[i] = !truth[i];
    }
    const auto cm = confuse(predictions(pred), frame_truth(truth));
    ASSERT_EQ(cm.total(), n);
    const auto m = metrics(cm);
    const auto swapped = metrics(confuse(predictions(npred), frame_truth(ntruth)));
    EXPECT_DOUBLE_EQ(m.accuracy, swapped.accuracy);
    EXPECT_EQ(m.sensitivity, swapped.specificity);
    EXPECT_EQ(m.specificity, swapped.sensitivity);
    EXPECT_GE(m.accuracy, 0.0);
    EXPECT_LE(m.accuracy, 1.0);
    EXPECT_EQ(m.accuracy == 1.0, cm.fp == 0 && cm.fn == 0);
  }
}

TEST(TruthCsv, ParsesBothLevels) {
  const auto truth = parse_truth_csv(
      "stream_id,level,frame,label\n"
      "a,frame,0,0\n"
      "a,frame,1,1\n"
      "b,video,,1\n"
      "a,video,,0\n");
  ASSERT_EQ(truth.size(), 3u);
  EXPECT_EQ(truth[0].stream_id, "a");
  EXPECT_EQ(truth[0].level(), LabelLevel::FRAME);
  EXPECT_EQ(std::get<0>(truth[0].labels).size(), 2u);
  EXPECT_EQ(truth[1].level(), LabelLevel::VIDEO);
  EXPECT_TRUE(std::get<bool>(truth[1].labels));
  EXPECT_EQ(parse_truth_csv(write_truth_csv(truth)), truth);
}

TEST(TruthCsv, Rejects) {
  const char* bad[] = {
      "",
      "id,level,frame,label\n",
      "stream_id,level,frame,label\na,frame,0\n",
      "stream_id,level,frame,label\na,frame,-1,1\n",
      "stream_id,level,frame,label\na,frame,x,1\n",
      "stream_id,level,frame,label\na,frame,0,2\n",
      "stream_id,level,frame,label\na,video,3,1\n",
      "stream_id,level,frame,label\na,scene,,1\n",
      "stream_id,level,frame,label\na,frame,0,1\na,frame,0,0\n",
      "stream_id,level,frame,label\na,video,,1\na,video,,0\n",
  };
  for (const char* text : bad) EXPECT_THROW(parse_truth_csv(text), Error) << text;
}

TEST(MetricsRecord, Layout) {
  const ConfusionMatrix cm{199, 0, 0, 0};
  EXPECT_EQ(metrics_record("video01", cm, metrics(cm)),
            R"({"stream_id":"video01","tp":199,"fp":0,"tn":0,"fn":0,"accuracy":1.0,)"
            R"("sensitivity":1.0,"specificity":null})");
}
