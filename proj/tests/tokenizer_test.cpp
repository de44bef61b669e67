#include <gtest/gtest.h>

#include <map>

#include "leadsheet/error.h"
#include "leadsheet/rng.h"
#include "leadsheet/score/synthetic.h"
#include "leadsheet/tokenizer/profile.h"
#include "leadsheet/tokenizer/tokenizer.h"

namespace leadsheet::tokenizer {
namespace {

using score::ChordQuality;
using score::ChordSymbol;
using score::Grouping;
using score::TimeSignature;

const Vocabulary& enc() {
  static const Vocabulary v = Vocabulary::encoder();
  return v;
}
const Vocabulary& dec() {
  static const Vocabulary v = Vocabulary::decoder_full();
  return v;
}

score::Event ev(int root, ChordQuality q, std::optional<int> midi, int ticks) {
  std::optional<score::Pitch> melody;
  if (midi) melody = score::Pitch{*midi};
  return {ChordSymbol::of(root, q), melody, {ticks}};
}

TEST(DensityBucket, Ranges) {
  EXPECT_EQ(density_bucket(0), Density::kLow);
  EXPECT_EQ(density_bucket(2), Density::kLow);
  EXPECT_EQ(density_bucket(3), Density::kMedium);
  EXPECT_EQ(density_bucket(4), Density::kMedium);
  EXPECT_EQ(density_bucket(5), Density::kMedium);
  EXPECT_EQ(density_bucket(6), Density::kHigh);
  EXPECT_EQ(density_bucket(40), Density::kHigh);
  EXPECT_THROW(density_bucket(-1), InvalidArgument);
}

TEST(Vocabulary, EncoderInventory) {
  EXPECT_EQ(enc().size(), 4u + 5 + 5 + 5 + 3);
  EXPECT_EQ(enc().text(kPadId), "<pad>");
  EXPECT_EQ(enc().text(kBarId), "BAR");
  EXPECT_TRUE(enc().find("ts:6/8").has_value());
  EXPECT_TRUE(enc().find("val:ModerateHigh").has_value());
  EXPECT_TRUE(enc().find("group:mid").has_value());
}

TEST(Vocabulary, DecoderInventory) {
  // 12 roots x 8 qualities + rest, 30 pitches + rest, 10 durations, 4 specials.
  EXPECT_EQ(dec().size(), 4u + 97 + 31 + 10);
  EXPECT_TRUE(dec().chord_id(ChordSymbol::rest()).has_value());
  EXPECT_FALSE(dec().chord_id(ChordSymbol::of(0, ChordQuality::kSuspendedFourth)).has_value());
  EXPECT_FALSE(dec().melody_id(score::Pitch{54}).has_value());
  EXPECT_TRUE(dec().melody_id(score::Pitch{84}).has_value());
}

TEST(Vocabulary, SerializationRoundTripsAndKeepsIds) {
  for (const Vocabulary* v : {&enc(), &dec()}) {
    const auto j = v->to_json();
    const Vocabulary back = Vocabulary::from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(back, *v);
    EXPECT_EQ(back.hash(), v->hash());
    EXPECT_EQ(back.to_json().dump(), j.dump());
  }
  auto j = dec().to_json();
  j["hash"] = "0000000000000000";
  EXPECT_THROW(Vocabulary::from_json(j), DataError);
  j = dec().to_json();
  j["tokens"].push_back("mel:60");
  j.erase("hash");
  EXPECT_THROW(Vocabulary::from_json(j), DataError);
}

TEST(Vocabulary, CorpusVocabularyIsCanonical) {
  auto corpus = score::random_corpus(10, 3);
  const Vocabulary a = Vocabulary::decoder_from_corpus(corpus);
  std::reverse(corpus.begin(), corpus.end());
  const Vocabulary b = Vocabulary::decoder_from_corpus(corpus);
  EXPECT_EQ(a, b);
  EXPECT_LE(a.size(), dec().size());
}

TEST(ConditionsOf, PhraseLabels) {
  score::LeadSheet four;
  for (int i = 0; i < 4; ++i) {
    score::Bar b;
    b.events = {ev(0, ChordQuality::kMajor, 60, 96)};
    four.bars.push_back(b);
  }
  const auto labels = score::phrase_grouping(4);
  for (std::size_t i = 0; i < 4; ++i) four.bars[i].grouping = labels[i];
  const auto track = conditions_of(four);
  ASSERT_EQ(track.size(), 4u);
  EXPECT_EQ(track[0].grouping, Grouping::kFirst1);
  EXPECT_EQ(track[1].grouping, Grouping::kFirst2);
  EXPECT_EQ(track[2].grouping, Grouping::kLast2);
  EXPECT_EQ(track[3].grouping, Grouping::kLast1);
}

TEST(ConditionsOf, ThreeFourMajorBar) {
  score::LeadSheet sheet;
  score::Bar b;
  b.time_signature = {3, 4};
  b.grouping = Grouping::kMiddle;
  b.events = {ev(0, ChordQuality::kMajor, 60, 24), ev(5, ChordQuality::kMajor, 62, 24),
              ev(7, ChordQuality::kMajor, std::nullopt, 24)};
  sheet.bars = {b};
  const auto track = conditions_of(sheet);
  ASSERT_EQ(track.size(), 1u);
  EXPECT_EQ(track[0].time_signature, (TimeSignature{3, 4}));
  EXPECT_EQ(track[0].valence, affect::ValenceDescriptor::kHigh);
  EXPECT_EQ(track[0].density, Density::kMedium);
}

TEST(EncodeConditions, LengthLawAndRoundTrip) {
  Rng rng(1);
  for (int n = 1; n <= 32; ++n) {
    ConditionTrack track;
    for (int i = 0; i < n; ++i) {
      track.push_back({score::kPermittedTimeSignatures[rng.below(5)],
                       score::kAllGroupings[rng.below(5)], affect::kAllDescriptors[rng.below(5)],
                       kAllDensities[rng.below(3)]});
    }
    const auto seq = encode_conditions(track, enc());
    EXPECT_EQ(seq.ids.size(), static_cast<std::size_t>(5 * n + 2));
    EXPECT_EQ(seq.role, Role::kEncoder);
    EXPECT_EQ(decode_conditions(seq, enc()), track);
  }
  EXPECT_THROW(encode_conditions({}, enc()), InvalidArgument);
  ConditionTrack odd = {{TimeSignature{5, 4}, Grouping::kMiddle, affect::ValenceDescriptor::kLow,
                         Density::kLow}};
  EXPECT_THROW(encode_conditions(odd, enc()), DataError);
}

// Two hand-built bars tokenized by hand.
TEST(EncodeLeadsheet, HandTokenizedSnippet) {
  score::LeadSheet sheet;
  score::Bar b1;
  b1.events = {ev(0, ChordQuality::kMajor, 64, 48), ev(0, ChordQuality::kMajor, 67, 48)};
  score::Bar b2;
  b2.time_signature = {3, 4};
  b2.events = {ev(9, ChordQuality::kMinorSeventh, std::nullopt, 24),
               ev(2, ChordQuality::kDominantSeventh, 62, 48)};
  sheet.bars = {b1, b2};
  const std::vector<std::string> expected = {
      "<s>",      "BAR",    "chord:C",  "mel:64",    "dur:48", "chord:C", "mel:67",
      "dur:48",   "BAR",    "chord:Am7", "mel:rest", "dur:24", "chord:D7", "mel:62",
      "dur:48",   "</s>"};
  const auto seq = encode_leadsheet(sheet, dec());
  std::vector<std::string> got;
  for (int id : seq.ids) got.push_back(dec().text(id));
  EXPECT_EQ(got, expected);
}

TEST(EncodeLeadsheet, LengthFormula) {
  for (const auto& s : score::random_corpus(30, 8)) {
    const auto seq = encode_leadsheet(s, dec());
    EXPECT_EQ(seq.ids.size(), 2 + s.bars.size() + 3 * s.event_count());
  }
  score::LeadSheet one;
  score::Bar b;
  b.events = {ev(0, ChordQuality::kMajor, 60, 24), ev(0, ChordQuality::kMajor, 62, 24),
              ev(0, ChordQuality::kMajor, 64, 24), ev(0, ChordQuality::kMajor, 65, 24)};
  one.bars = {b};
  EXPECT_EQ(encode_leadsheet(one, dec()).ids.size(), 15u);
}

TEST(EncodeLeadsheet, OutOfVocabularyThrows) {
  score::LeadSheet s;
  score::Bar b;
  b.events = {ev(0, ChordQuality::kSuspendedFourth, 60, 96)};
  s.bars = {b};
  EXPECT_THROW(encode_leadsheet(s, dec()), DataError);
  s.bars[0].events[0] = ev(0, ChordQuality::kMajor, 40, 96);
  EXPECT_THROW(encode_leadsheet(s, dec()), DataError);
  s.bars[0].events[0] = ev(0, ChordQuality::kMajor, 60, 95);
  EXPECT_THROW(encode_leadsheet(s, dec()), DataError);
}

TEST(DecodeTokens, RoundTripOnRandomSheets) {
  score::SyntheticOptions opts;
  opts.max_bars = 32;
  for (const auto& s : score::random_corpus(100, 17, opts)) {
    const auto seq = encode_leadsheet(s, dec());
    EXPECT_EQ(decode_tokens(seq, conditions_of(s), dec(), info_of(s)), s);
  }
}

TEST(DecodeTokens, GrammarErrorAtSecondMelody) {
  score::LeadSheet s = score::random_corpus(1, 4)[0];
  auto seq = encode_leadsheet(s, dec());
  // ids: <s> BAR c m d ... ; replace the duration of the first event by a melody.
  seq.ids[4] = *dec().melody_id(score::Pitch{60});
  try {
    decode_tokens(seq, conditions_of(s), dec());
    FAIL();
  } catch (const GrammarError& e) {
    EXPECT_EQ(e.index(), 4u);
  }
}

TEST(DecodeTokens, OverflowNamesTheBar) {
  score::LeadSheet s;
  for (int i = 0; i < 4; ++i) {
    score::Bar b;
    b.events = {ev(0, ChordQuality::kMajor, 60, 48), ev(0, ChordQuality::kMajor, 62, 48)};
    s.bars.push_back(b);
  }
  const auto track = conditions_of(s);
  s.bars[2].events[1].duration.ticks = 72;
  const auto seq = encode_leadsheet(s, dec());
  try {
    decode_tokens(seq, track, dec());
    FAIL();
  } catch (const CapacityError& e) {
    EXPECT_EQ(e.bar(), 2u);
    EXPECT_NE(std::string(e.what()).find("bar 3"), std::string::npos);
  }
  s.bars[2].events[1].duration.ticks = 24;
  EXPECT_THROW(decode_tokens(encode_leadsheet(s, dec()), track, dec()), CapacityError);
}

TEST(DecodeTokens, StructuralErrors) {
  score::LeadSheet s = score::random_corpus(1, 6)[0];
  const auto track = conditions_of(s);
  auto seq = encode_leadsheet(s, dec());
  auto missing_end = seq;
  missing_end.ids.pop_back();
  EXPECT_THROW(decode_tokens(missing_end, track, dec()), GrammarError);
  auto short_track = track;
  short_track.pop_back();
  EXPECT_THROW(decode_tokens(seq, short_track, dec()), GrammarError);
  auto trailing = seq;
  trailing.ids.push_back(kBarId);
  EXPECT_THROW(decode_tokens(trailing, track, dec()), GrammarError);
  auto empty_bar = seq;
  empty_bar.ids.insert(empty_bar.ids.begin() + 1, kBarId);
  EXPECT_THROW(decode_tokens(empty_bar, track, dec()), GrammarError);
}

TEST(TokenJson, RoundTripAndHashCheck) {
  const auto s = score::random_corpus(1, 2)[0];
  const auto seq = encode_leadsheet(s, dec());
  const auto j = sequence_to_json(seq, dec());
  EXPECT_EQ(sequence_from_json(j, dec()), seq);
  EXPECT_THROW(sequence_from_json(j, enc()), DataError);
}

// Walks the grammar with random allowed tokens and checks the result decodes.
TEST(DecoderGrammar, RandomWalksAlwaysDecode) {
  Rng rng(12);
  std::vector<unsigned char> mask(dec().size());
  for (int trial = 0; trial < 200; ++trial) {
    ConditionTrack track;
    const int bars = 1 + static_cast<int>(rng.below(8));
    std::vector<int> caps;
    for (int i = 0; i < bars; ++i) {
      BarCondition c;
      c.time_signature = score::kPermittedTimeSignatures[rng.below(5)];
      track.push_back(c);
      caps.push_back(c.time_signature.bar_ticks());
    }
    DecoderGrammar g(dec(), caps);
    TokenSequence seq{Role::kDecoder, {kStartId}};
    while (!g.done()) {
      g.allowed(mask);
      std::vector<int> ok;
      for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) ok.push_back(static_cast<int>(i));
      }
      ASSERT_FALSE(ok.empty());
      EXPECT_EQ(mask[kPadId], 0);
      const int id = ok[rng.below(ok.size())];
      g.advance(id);
      seq.ids.push_back(id);
    }
    const auto sheet = decode_tokens(seq, track, dec());
    ASSERT_EQ(sheet.bars.size(), static_cast<std::size_t>(bars));
    for (const auto& b : sheet.bars) EXPECT_EQ(b.filled_ticks(), b.time_signature.bar_ticks());
  }
}

TEST(DecoderGrammar, RejectsDisallowedTokens) {
  DecoderGrammar g(dec(), {96});
  EXPECT_TRUE(g.allows(kBarId));
  EXPECT_FALSE(g.allows(kEndId));
  EXPECT_THROW(g.advance(kEndId), GrammarError);
  g.advance(kBarId);
  EXPECT_TRUE(g.allows(*dec().chord_id(ChordSymbol::rest())));
  g.advance(*dec().chord_id(ChordSymbol::of(0, ChordQuality::kMajor)));
  g.advance(*dec().melody_id(score::Pitch{60}));
  EXPECT_TRUE(g.allows(*dec().duration_id(96)));
  g.advance(*dec().duration_id(72));
  EXPECT_EQ(g.remaining_ticks(), 24);
  EXPECT_FALSE(g.allows(kBarId));
  EXPECT_FALSE(g.allows(*dec().duration_id(24)));
  g.advance(*dec().chord_id(ChordSymbol::rest()));
  EXPECT_FALSE(g.allows(*dec().chord_id(ChordSymbol::rest())));
  g.advance(*dec().melody_id(std::nullopt));
  EXPECT_FALSE(g.allows(*dec().duration_id(36)));
  EXPECT_TRUE(g.allows(*dec().duration_id(18)));
  g.advance(*dec().duration_id(24));
  EXPECT_TRUE(g.allows(kEndId));
  EXPECT_FALSE(g.allows(kBarId));
  g.advance(kEndId);
  EXPECT_TRUE(g.done());
  EXPECT_FALSE(g.allows(kEndId));
}

TEST(DecoderGrammar, MasksDurationsThatStrandTheRemainder) {
  // With only 24 and 16 tick durations a 48-tick bar can be 24+24 or 16x3;
  // after 24 the remainder 24 is fine, after 16 another 24 would strand 8.
  const std::vector<score::LeadSheet> corpus = [] {
    score::LeadSheet s;
    score::Bar b;
    b.time_signature = {2, 4};
    b.events = {ev(0, ChordQuality::kMajor, 60, 24), ev(0, ChordQuality::kMajor, 60, 16)};
    s.bars = {b};
    return std::vector<score::LeadSheet>{s};
  }();
  const Vocabulary v = Vocabulary::decoder_from_corpus(corpus);
  DecoderGrammar g(v, {48});
  g.advance(kBarId);
  g.advance(*v.chord_id(ChordSymbol::of(0, ChordQuality::kMajor)));
  g.advance(*v.melody_id(score::Pitch{60}));
  g.advance(*v.duration_id(16));
  g.advance(*v.chord_id(ChordSymbol::of(0, ChordQuality::kMajor)));
  g.advance(*v.melody_id(score::Pitch{60}));
  EXPECT_FALSE(g.allows(*v.duration_id(24)));
  EXPECT_TRUE(g.allows(*v.duration_id(16)));
  EXPECT_THROW(DecoderGrammar(v, {20}), InvalidArgument);
}

TEST(DecoderGrammar, TokenBudgetKeepsWalksShort) {
  Rng rng(21);
  std::vector<unsigned char> mask(dec().size());
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> caps;
    const int bars = 4 + static_cast<int>(rng.below(13));
    for (int i = 0; i < bars; ++i) {
      caps.push_back(score::kPermittedTimeSignatures[rng.below(5)].bar_ticks());
    }
    DecoderGrammar g(dec(), caps);
    // Every permitted bar capacity (96, 72 or 48 ticks) is itself a permitted
    // duration, so the shortest completion is BAR plus one event per bar.
    std::size_t shortest = 1;
    for (std::size_t b = 0; b < caps.size(); ++b) shortest += 4;
    ASSERT_EQ(g.min_total_tokens(), shortest);
    const std::size_t budget = shortest + rng.below(40);
    g.set_token_budget(budget);
    std::size_t used = 0;
    while (!g.done()) {
      g.allowed(mask);
      std::vector<int> ok;
      for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) ok.push_back(static_cast<int>(i));
      }
      ASSERT_FALSE(ok.empty());
      g.advance(ok[rng.below(ok.size())]);
      ++used;
    }
    EXPECT_LE(used, budget);
    EXPECT_EQ(g.bar_index(), bars);
  }
}

TEST(DecoderGrammar, TokenBudgetBelowMinimumIsRejected) {
  DecoderGrammar g(dec(), {96, 72});
  EXPECT_EQ(g.min_total_tokens(), 1 + 4 + 4u);
  EXPECT_THROW(g.set_token_budget(8), InvalidArgument);
  g.set_token_budget(9);
  g.advance(kBarId);
  g.advance(*dec().chord_id(ChordSymbol::rest()));
  g.advance(*dec().melody_id(std::nullopt));
  // Only the whole-bar duration leaves room for the second bar and </s>.
  EXPECT_TRUE(g.allows(*dec().duration_id(96)));
  EXPECT_FALSE(g.allows(*dec().duration_id(48)));
}

ConditionProfile sixty_percent_common_time() {
  ConditionProfile p;
  p.name = "fixture";
  p.pieces = 10;
  p.time_signatures = {{"4/4", 60}, {"3/4", 25}, {"6/8", 15}};
  p.valence = {{"High", 3}, {"Low", 1}};
  p.density = {{"low", 1}, {"medium", 2}, {"high", 1}};
  p.phrase_lengths = {{4, 1}, {8, 3}};
  p.bar_counts = {{8, 4}, {16, 6}};
  return p;
}

TEST(Profile, CountsMatchTheConditions) {
  const auto corpus = score::random_corpus(12, 4);
  const auto p = profile_of(corpus, "train");
  EXPECT_EQ(p.pieces, 12u);
  // Oracle: recount from the condition tracks.
  std::map<std::string, std::size_t> meters;
  std::size_t bars = 0, firsts = 0;
  for (const auto& sheet : corpus) {
    for (const auto& c : conditions_of(sheet)) {
      ++meters[c.time_signature.to_string()];
      ++bars;
      firsts += c.grouping == Grouping::kFirst1 ? 1 : 0;
    }
  }
  EXPECT_EQ(p.time_signatures, meters);
  std::size_t phrases = 0, phrase_bars = 0, valence_bars = 0, density_bars = 0;
  for (const auto& [len, n] : p.phrase_lengths) {
    phrases += n;
    phrase_bars += len * n;
  }
  for (const auto& [k, n] : p.valence) valence_bars += n;
  for (const auto& [k, n] : p.density) density_bars += n;
  EXPECT_EQ(phrase_bars, bars);
  EXPECT_EQ(valence_bars, bars);
  EXPECT_EQ(density_bars, bars);
  EXPECT_EQ(phrases, firsts);
  EXPECT_THROW(profile_of({}, "none"), InvalidArgument);
}

TEST(Profile, JsonRoundTripAndValidation) {
  const auto p = sixty_percent_common_time();
  EXPECT_EQ(profile_from_json(profile_to_json(p)), p);
  auto bad = profile_to_json(p);
  bad["time_signatures"]["5/4"] = 3;
  EXPECT_THROW(profile_from_json(bad), DataError);
  bad = profile_to_json(p);
  bad["phrase_lengths"]["08"] = 1;
  EXPECT_THROW(profile_from_json(bad), DataError);
  bad = profile_to_json(p);
  bad.erase("density");
  EXPECT_THROW(profile_from_json(bad), DataError);
  EXPECT_THROW(profile_from_json(nlohmann::json::array()), DataError);
}

TEST(Template, SameSeedSameTemplate) {
  const auto p = sixty_percent_common_time();
  Rng a(5), b(5);
  EXPECT_EQ(sample_template(p, 12, a), sample_template(p, 12, b));
  EXPECT_THROW(sample_template(p, 0, a), InvalidArgument);
  EXPECT_THROW(sample_template(p, 33, a), InvalidArgument);
}

TEST(Template, MeterFrequencyFollowsTheProfile) {
  const auto p = sixty_percent_common_time();
  Rng rng(77);
  int common = 0;
  constexpr int kSamples = 10000;
  for (int i = 0; i < kSamples; ++i) {
    const auto track = sample_template(p, 1 + static_cast<int>(rng.below(8)), rng);
    common += track[0].time_signature == TimeSignature{4, 4} ? 1 : 0;
  }
  EXPECT_NEAR(static_cast<double>(common) / kSamples, 0.60, 0.02);
}

TEST(Template, GroupingFollowsPhrases) {
  const auto p = sixty_percent_common_time();
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int bars = 1 + static_cast<int>(rng.below(32));
    const auto track = sample_template(p, bars, rng);
    ASSERT_EQ(static_cast<int>(track.size()), bars);
    EXPECT_EQ(track.front().grouping, Grouping::kFirst1);
    for (const auto& c : track) EXPECT_EQ(c.time_signature, track.front().time_signature);
    // Every phrase is labelled exactly as phrase_grouping labels its length.
    std::size_t start = 0;
    for (std::size_t i = 1; i <= track.size(); ++i) {
      if (i == track.size() || track[i].grouping == Grouping::kFirst1) {
        const auto want = score::phrase_grouping(static_cast<int>(i - start));
        for (std::size_t k = start; k < i; ++k) EXPECT_EQ(track[k].grouping, want[k - start]);
        start = i;
      }
    }
  }
}

}  // namespace
}  // namespace leadsheet::tokenizer
