#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "leadsheet/error.h"
#include "leadsheet/rng.h"
#include "leadsheet/score/corpus_json.h"
#include "leadsheet/score/musicxml.h"
#include "leadsheet/score/normalize.h"
#include "leadsheet/score/synthetic.h"

namespace leadsheet::score {
namespace {

// Small MusicXML builder. Test documents are written out by hand rather than
// through write_musicxml so the parser is checked against an independent
// source of truth.
struct XmlNote {
  std::string step;
  int alter = 0;
  int octave = 4;
  int duration = 1;   // in divisions
  bool rest = false;
  bool chord = false;  // <chord/> member
  std::string tie;     // "", "start", "stop", "both"
};

XmlNote n(const std::string& step, int octave, int duration, int alter = 0) {
  return {step, alter, octave, duration};
}

XmlNote r(int duration) {
  XmlNote x;
  x.rest = true;
  x.duration = duration;
  return x;
}

struct XmlMeasure {
  std::string prefix;  // attributes, barlines, harmony before the first note
  std::vector<XmlNote> notes;
  std::string suffix;
  std::string extra_attr;
};

std::string harmony(const std::string& step, const std::string& kind, int alter = 0,
                    const std::string& degrees = "") {
  std::ostringstream os;
  os << "<harmony><root><root-step>" << step << "</root-step>";
  if (alter != 0) os << "<root-alter>" << alter << "</root-alter>";
  os << "</root><kind>" << kind << "</kind>" << degrees << "</harmony>";
  return os.str();
}

std::string attributes(int divisions, int fifths, const std::string& mode, int beats,
                       int beat_type) {
  std::ostringstream os;
  os << "<attributes><divisions>" << divisions << "</divisions><key><fifths>" << fifths
     << "</fifths>";
  if (!mode.empty()) os << "<mode>" << mode << "</mode>";
  os << "</key><time><beats>" << beats << "</beats><beat-type>" << beat_type
     << "</beat-type></time></attributes>";
  return os.str();
}

std::string document(const std::vector<XmlMeasure>& measures) {
  std::ostringstream os;
  os << "<?xml version=\"1.0\"?>\n<score-partwise version=\"3.1\">\n"
     << "<work><work-title>Test</work-title></work>\n"
     << "<part-list><score-part id=\"P1\"><part-name>M</part-name></score-part></part-list>\n"
     << "<part id=\"P1\">\n";
  int number = 1;
  for (const auto& m : measures) {
    os << "<measure number=\"" << number++ << "\"" << m.extra_attr << ">\n" << m.prefix << "\n";
    for (const auto& x : m.notes) {
      os << "<note>";
      if (x.chord) os << "<chord/>";
      if (x.rest) {
        os << "<rest/>";
      } else {
        os << "<pitch><step>" << x.step << "</step>";
        if (x.alter != 0) os << "<alter>" << x.alter << "</alter>";
        os << "<octave>" << x.octave << "</octave></pitch>";
      }
      os << "<duration>" << x.duration << "</duration>";
      if (x.tie == "start" || x.tie == "both") os << "<tie type=\"start\"/>";
      if (x.tie == "stop" || x.tie == "both") os << "<tie type=\"stop\"/>";
      os << "<voice>1</voice></note>\n";
    }
    os << m.suffix << "</measure>\n";
  }
  os << "</part>\n</score-partwise>\n";
  return os.str();
}

// A 4/4 bar of four quarter notes starting at `step`, under one chord.
XmlMeasure quarters(const std::string& chord_step, const std::string& kind,
                    std::vector<XmlNote> notes) {
  XmlMeasure m;
  m.prefix = harmony(chord_step, kind);
  m.notes = std::move(notes);
  return m;
}

XmlMeasure plain_bar(int midi_offset = 0) {
  static const char* steps[] = {"C", "D", "E", "F", "G", "A", "B"};
  const std::string s = steps[midi_offset % 7];
  return quarters("C", "major", {n(s, 4, 1), n(s, 4, 1), n(s, 4, 1), n(s, 4, 1)});
}

std::vector<XmlMeasure> plain_bars(int count, const std::string& attrs) {
  std::vector<XmlMeasure> ms;
  for (int i = 0; i < count; ++i) {
    ms.push_back(plain_bar(i));
    if (i == 0) ms[0].prefix = attrs + ms[0].prefix;
  }
  return ms;
}

// --- parse_musicxml -------------------------------------------------------

TEST(ParseMusicXml, MinimalOneBarDocument) {
  XmlMeasure m = quarters("C", "major", {n("E", 4, 1), n("F", 4, 1), n("G", 4, 1), n("A", 4, 1)});
  m.prefix = attributes(1, 0, "major", 4, 4) + m.prefix;
  const RawScore s = parse_musicxml(document({m}));
  ASSERT_EQ(s.measures.size(), 1u);
  ASSERT_EQ(s.measures[0].notes.size(), 4u);
  ASSERT_EQ(s.measures[0].harmonies.size(), 1u);
  EXPECT_EQ(s.measures[0].harmonies[0].chord, ChordSymbol::of(0, ChordQuality::kMajor));
  EXPECT_EQ(*s.measures[0].notes[0].midi, 64);
  EXPECT_EQ(*s.measures[0].notes[3].midi, 69);
  EXPECT_EQ(s.measures[0].notes[2].onset, 48);
  EXPECT_EQ(s.measures[0].notes[2].duration, 24);
  EXPECT_EQ(s.title, "Test");
}

TEST(ParseMusicXml, RepeatStructureIsPreserved) {
  auto ms = plain_bars(4, attributes(1, 0, "major", 4, 4));
  ms[1].prefix = "<barline location=\"left\"><repeat direction=\"forward\"/></barline>" +
                 ms[1].prefix;
  ms[2].suffix = "<barline location=\"right\"><repeat direction=\"backward\"/></barline>";
  const RawScore s = parse_musicxml(document(ms));
  ASSERT_EQ(s.measures.size(), 4u);
  EXPECT_TRUE(s.measures[1].repeat_forward);
  EXPECT_TRUE(s.measures[2].repeat_backward);
  EXPECT_FALSE(s.measures[0].repeat_forward);
  EXPECT_FALSE(s.measures[3].repeat_backward);
}

TEST(ParseMusicXml, SeventhFlatNineIsFlaggedUnusable) {
  XmlMeasure m = plain_bar();
  m.prefix = attributes(1, 0, "major", 4, 4) +
             harmony("C", "dominant", 0,
                     "<degree><degree-value>9</degree-value><degree-alter>-1</degree-alter>"
                     "<degree-type>add</degree-type></degree>");
  const RawScore s = parse_musicxml(document({m}));
  ASSERT_EQ(s.measures[0].harmonies.size(), 1u);
  const RawHarmony& h = s.measures[0].harmonies[0];
  EXPECT_EQ(h.chord.quality, ChordQuality::kSeventhFlatNinth);
  EXPECT_FALSE(h.usable());
  EXPECT_EQ(h.chord.to_string(), "C7b9");
}

TEST(ParseMusicXml, KindsMapToQualities) {
  const std::pair<const char*, ChordQuality> cases[] = {
      {"major", ChordQuality::kMajor},
      {"minor", ChordQuality::kMinor},
      {"dominant", ChordQuality::kDominantSeventh},
      {"major-seventh", ChordQuality::kMajorSeventh},
      {"minor-seventh", ChordQuality::kMinorSeventh},
      {"dominant-ninth", ChordQuality::kDominantNinth},
      {"minor-ninth", ChordQuality::kMinorNinth},
      {"diminished", ChordQuality::kDiminished},
      {"suspended-fourth", ChordQuality::kSuspendedFourth},
      {"pedal", ChordQuality::kOther},
  };
  for (const auto& [kind, quality] : cases) {
    XmlMeasure m = plain_bar();
    m.prefix = attributes(1, 0, "major", 4, 4) + harmony("B", kind, -1);
    const RawScore s = parse_musicxml(document({m}));
    EXPECT_EQ(s.measures[0].harmonies[0].chord, ChordSymbol::of(10, quality)) << kind;
  }
}

TEST(ParseMusicXml, MalformedXmlReportsLine) {
  const std::string doc =
      "<?xml version=\"1.0\"?>\n<score-partwise>\n<part id=\"P1\">\n<measure>\n"
      "<note></measure>\n</part>\n</score-partwise>\n";
  try {
    parse_musicxml(doc);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 5u);
    EXPECT_NE(std::string(e.what()).find("line 5"), std::string::npos);
  }
}

TEST(ParseMusicXml, MissingChordsOrMelodyIsUnusable) {
  XmlMeasure no_chords;
  no_chords.prefix = attributes(1, 0, "major", 4, 4);
  no_chords.notes = {n("C", 4, 4)};
  EXPECT_THROW(parse_musicxml(document({no_chords})), UnusableSourceError);

  XmlMeasure no_melody;
  no_melody.prefix = attributes(1, 0, "major", 4, 4) + harmony("C", "major");
  no_melody.notes = {r(4)};
  EXPECT_THROW(parse_musicxml(document({no_melody})), UnusableSourceError);

  EXPECT_THROW(parse_musicxml("<?xml version=\"1.0\"?><opus/>"), UnusableSourceError);
}

TEST(ParseMusicXml, ModeIsInferredFromTonicChords) {
  // One sharp, no mode: G major or E minor. Two Em chords against one G.
  auto ms = plain_bars(3, attributes(1, 1, "", 4, 4));
  ms[0].prefix = attributes(1, 1, "", 4, 4) + harmony("E", "minor");
  ms[1].prefix = harmony("E", "minor");
  ms[2].prefix = harmony("G", "major");
  const RawScore s = parse_musicxml(document(ms));
  EXPECT_EQ(s.measures[0].key.mode, KeyMode::kMinor);
  EXPECT_EQ(s.measures[0].key.tonic(), 4);
}

TEST(ParseMusicXml, DivisionsScaleToTicks) {
  XmlMeasure m;
  m.prefix = attributes(2, 0, "major", 3, 4) + harmony("C", "major");
  m.notes = {n("C", 4, 3), n("D", 4, 1), n("E", 4, 2)};
  const RawScore s = parse_musicxml(document({m}));
  ASSERT_EQ(s.measures[0].notes.size(), 3u);
  EXPECT_EQ(s.measures[0].notes[0].duration, 36);
  EXPECT_EQ(s.measures[0].notes[1].duration, 12);
  EXPECT_EQ(s.measures[0].notes[2].onset, 48);
  EXPECT_EQ(s.measures[0].time_signature, (TimeSignature{3, 4}));
  EXPECT_FALSE(s.measures[0].off_grid);
}

// --- transpose_to_c -------------------------------------------------------

RawScore one_segment(int fifths, const std::string& mode, std::vector<XmlNote> notes,
                     const std::string& chord_step = "C", const std::string& kind = "major") {
  XmlMeasure m;
  m.prefix = attributes(1, fifths, mode, 4, 4) + harmony(chord_step, kind);
  m.notes = std::move(notes);
  return parse_musicxml(document({m}));
}

TEST(TransposeToC, GMajorMovesDownAFifth) {
  const RawScore s = transpose_to_c(one_segment(1, "major", {n("D", 5, 4)}, "G", "major"));
  EXPECT_EQ(*s.measures[0].notes[0].midi, 67);
  EXPECT_EQ(s.measures[0].harmonies[0].chord, ChordSymbol::of(0, ChordQuality::kMajor));
  EXPECT_EQ(s.measures[0].key.fifths, 0);
}

TEST(TransposeToC, AMinorIsUnchanged) {
  const RawScore in = one_segment(0, "minor", {n("A", 4, 2), n("E", 5, 2)}, "A", "minor");
  const RawScore out = transpose_to_c(in);
  EXPECT_EQ(*out.measures[0].notes[0].midi, 69);
  EXPECT_EQ(*out.measures[0].notes[1].midi, 76);
  EXPECT_EQ(out.measures[0].harmonies[0].chord, in.measures[0].harmonies[0].chord);
}

TEST(TransposeToC, EMinorChordBecomesAMinor) {
  const RawScore s = transpose_to_c(one_segment(1, "minor", {n("E", 4, 4)}, "E", "minor"));
  EXPECT_EQ(s.measures[0].harmonies[0].chord, ChordSymbol::of(9, ChordQuality::kMinor));
  EXPECT_EQ(*s.measures[0].notes[0].midi % 12, 9);
}

TEST(TransposeToC, LeavingMidiRangeThrows) {
  // D-flat major needs +11 or -1; the mean pitch picks +11 and G9 overflows.
  RawScore s = one_segment(-5, "major", {n("C", -1, 2), n("G", 9, 2)});
  EXPECT_THROW(transpose_to_c(s), DataError);
}

TEST(TransposeToC, PreservesIntervalsOnRandomScores) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int fifths = static_cast<int>(rng.below(15)) - 7;
    std::vector<XmlNote> notes;
    static const char* steps[] = {"C", "D", "E", "F", "G", "A", "B"};
    for (int i = 0; i < 4; ++i) {
      notes.push_back(n(steps[rng.below(7)], 3 + static_cast<int>(rng.below(3)), 1,
                        static_cast<int>(rng.below(3)) - 1));
    }
    const RawScore in = one_segment(fifths, rng.below(2) ? "major" : "minor", notes);
    const RawScore out = transpose_to_c(in);
    std::multiset<int> before;
    std::multiset<int> after;
    const auto& a = in.measures[0].notes;
    const auto& b = out.measures[0].notes;
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < a.size(); ++j) {
        before.insert(*a[j].midi - *a[i].midi);
        after.insert(*b[j].midi - *b[i].midi);
      }
    }
    EXPECT_EQ(before, after);
    const int tonic = out.measures[0].key.tonic();
    EXPECT_EQ(tonic, out.measures[0].key.mode == KeyMode::kMinor ? 9 : 0);
    for (const auto& note : b) EXPECT_EQ(note.duration, 24);
  }
}

// --- unfold_and_split -----------------------------------------------------

TEST(UnfoldAndSplit, RepeatedPhraseIsDuplicated) {
  auto ms = plain_bars(8, attributes(1, 0, "major", 4, 4));
  ms[2].prefix = "<barline location=\"left\"><repeat direction=\"forward\"/></barline>" +
                 ms[2].prefix;
  ms[3].suffix = "<barline location=\"right\"><repeat direction=\"backward\"/></barline>";
  const auto result = unfold_and_split(transpose_to_c(parse_musicxml(document(ms))));
  ASSERT_EQ(result.sheets.size(), 1u);
  EXPECT_EQ(result.sheets[0].bars.size(), 10u);
  // Bars 3-4 sound twice: melody pitches E E F F -> E, F, E, F.
  std::vector<int> firsts;
  for (const auto& b : result.sheets[0].bars) firsts.push_back(b.events[0].melody->midi);
  EXPECT_EQ(firsts, (std::vector<int>{60, 62, 64, 65, 64, 65, 67, 69, 71, 60}));
}

TEST(UnfoldAndSplit, VoltasFollowTheirPass) {
  // |: 1 2 [1. 3 :| [2. 4 -> 1 2 3 1 2 4
  auto ms = plain_bars(4, attributes(1, 0, "major", 4, 4));
  ms[0].prefix = "<barline location=\"left\"><repeat direction=\"forward\"/></barline>" +
                 ms[0].prefix;
  ms[2].prefix = "<barline location=\"left\"><ending number=\"1\" type=\"start\"/></barline>" +
                 ms[2].prefix;
  ms[2].suffix =
      "<barline location=\"right\"><ending number=\"1\" type=\"stop\"/>"
      "<repeat direction=\"backward\"/></barline>";
  ms[3].prefix = "<barline location=\"left\"><ending number=\"2\" type=\"start\"/></barline>" +
                 ms[3].prefix;
  ms[3].suffix = "<barline location=\"right\"><ending number=\"2\" type=\"discontinue\"/></barline>";
  const auto result = unfold_and_split(parse_musicxml(document(ms)));
  ASSERT_EQ(result.sheets.size(), 1u);
  std::vector<int> firsts;
  int total = 0;
  for (const auto& b : result.sheets[0].bars) {
    firsts.push_back(b.events[0].melody->midi);
    total += b.filled_ticks();
  }
  EXPECT_EQ(firsts, (std::vector<int>{60, 62, 64, 60, 62, 65}));
  EXPECT_EQ(total, 6 * 96);  // manual play-through: six 4/4 bars
}

TEST(UnfoldAndSplit, KeyChangeSplitsInstances) {
  auto ms = plain_bars(12, attributes(1, 0, "major", 4, 4));
  ms[6].prefix = "<attributes><key><fifths>2</fifths><mode>major</mode></key></attributes>" +
                 harmony("D", "major");
  ms[6].notes = {n("D", 5, 1), n("E", 5, 1), n("F", 5, 1, 1), n("G", 5, 1)};
  const RawScore raw = parse_musicxml(document(ms));
  EXPECT_EQ(raw.key_segment_count(), 2);
  const auto result = unfold_and_split(transpose_to_c(raw));
  ASSERT_EQ(result.sheets.size(), 2u);
  EXPECT_EQ(result.sheets[0].bars.size(), 6u);
  EXPECT_EQ(result.sheets[1].bars.size(), 6u);
  EXPECT_EQ(result.sheets[1].bars[0].events[0].chord, ChordSymbol::of(0, ChordQuality::kMajor));
  EXPECT_EQ(result.sheets[1].bars[0].events[0].melody->midi, 72);  // D5 down a whole tone
}

TEST(UnfoldAndSplit, LongScoreIsTruncatedAt32Bars) {
  const auto result =
      unfold_and_split(parse_musicxml(document(plain_bars(40, attributes(1, 0, "major", 4, 4)))));
  ASSERT_EQ(result.sheets.size(), 1u);
  EXPECT_EQ(result.sheets[0].bars.size(), 32u);
}

TEST(UnfoldAndSplit, ShortInstancesAreDiscardedWithANote) {
  auto ms = plain_bars(7, attributes(1, 0, "major", 4, 4));
  ms[4].prefix = "<attributes><key><fifths>-1</fifths><mode>major</mode></key></attributes>" +
                 ms[4].prefix;
  const auto result = unfold_and_split(parse_musicxml(document(ms)));
  ASSERT_EQ(result.sheets.size(), 1u);
  ASSERT_EQ(result.discarded.size(), 1u);
  EXPECT_EQ(result.discarded[0].key_segment, 1);
  EXPECT_EQ(result.discarded[0].bars, 3);
}

TEST(UnfoldAndSplit, TopVoiceAndTies) {
  auto ms = plain_bars(4, attributes(1, 0, "major", 4, 4));
  // Bar 1: C4+E4 dyad then G4 tied within the bar over two beats, then A4 tied
  // into bar 2.
  XmlNote dyad_top = n("E", 4, 1);
  dyad_top.chord = true;
  XmlNote g1 = n("G", 4, 1);
  g1.tie = "start";
  XmlNote g2 = n("G", 4, 1);
  g2.tie = "stop";
  XmlNote a1 = n("A", 4, 1);
  a1.tie = "start";
  ms[0].notes = {n("C", 4, 1), dyad_top, g1, g2, a1};
  XmlNote a2 = n("A", 4, 1);
  a2.tie = "stop";
  ms[1].notes = {a2, n("B", 4, 3)};
  const auto result = unfold_and_split(parse_musicxml(document(ms)));
  ASSERT_EQ(result.sheets.size(), 1u);
  const Bar& b1 = result.sheets[0].bars[0];
  ASSERT_EQ(b1.events.size(), 3u);
  EXPECT_EQ(b1.events[0].melody->midi, 64);
  EXPECT_EQ(b1.events[1].melody->midi, 67);
  EXPECT_EQ(b1.events[1].duration.ticks, 48);
  EXPECT_EQ(b1.events[2].melody->midi, 69);
  const Bar& b2 = result.sheets[0].bars[1];
  ASSERT_EQ(b2.events.size(), 2u);  // cross-bar tie ignored: A4 restarts
  EXPECT_EQ(b2.events[0].melody->midi, 69);
  EXPECT_EQ(b2.events[0].duration.ticks, 24);
}

TEST(UnfoldAndSplit, PickupIsPaddedWithLeadingRest) {
  auto ms = plain_bars(5, attributes(1, 0, "major", 4, 4));
  ms[0].extra_attr = " implicit=\"yes\"";
  ms[0].notes = {n("G", 4, 1)};
  const auto result = unfold_and_split(parse_musicxml(document(ms)));
  ASSERT_EQ(result.sheets.size(), 1u);
  const Bar& pickup = result.sheets[0].bars[0];
  ASSERT_EQ(pickup.events.size(), 2u);
  EXPECT_FALSE(pickup.events[0].melody.has_value());
  EXPECT_EQ(pickup.events[0].duration.ticks, 72);
  EXPECT_EQ(pickup.events[1].melody->midi, 67);
  EXPECT_EQ(pickup.filled_ticks(), 96);
}

TEST(UnfoldAndSplit, ChordChangeSplitsANote) {
  auto ms = plain_bars(4, attributes(1, 0, "major", 4, 4));
  ms[0].notes = {n("C", 5, 4)};
  ms[0].prefix += "<forward><duration>2</duration></forward>" + harmony("F", "major") +
                  "<backup><duration>2</duration></backup>";
  const auto result = unfold_and_split(parse_musicxml(document(ms)));
  const Bar& b = result.sheets[0].bars[0];
  ASSERT_EQ(b.events.size(), 2u);
  EXPECT_EQ(b.events[0].chord, ChordSymbol::of(0, ChordQuality::kMajor));
  EXPECT_EQ(b.events[1].chord, ChordSymbol::of(5, ChordQuality::kMajor));
  EXPECT_EQ(b.events[0].melody, b.events[1].melody);
  EXPECT_EQ(b.events[0].duration.ticks, 48);
}

TEST(UnfoldAndSplit, GroupingFollowsPhraseMarkers) {
  auto ms = plain_bars(10, attributes(1, 0, "major", 4, 4));
  ms[3].suffix = "<barline location=\"right\"><bar-style>light-light</bar-style></barline>";
  const auto result = unfold_and_split(parse_musicxml(document(ms)));
  std::vector<Grouping> got;
  for (const auto& b : result.sheets[0].bars) got.push_back(b.grouping);
  using G = Grouping;
  EXPECT_EQ(got, (std::vector<G>{G::kFirst1, G::kFirst2, G::kLast2, G::kLast1, G::kFirst1,
                                 G::kFirst2, G::kMiddle, G::kMiddle, G::kLast2, G::kLast1}));
}

TEST(PhraseGrouping, ShortAndLongPhrases) {
  using G = Grouping;
  EXPECT_EQ(phrase_grouping(4), (std::vector<G>{G::kFirst1, G::kFirst2, G::kLast2, G::kLast1}));
  EXPECT_EQ(phrase_grouping(6), (std::vector<G>{G::kFirst1, G::kFirst2, G::kMiddle, G::kMiddle,
                                                G::kLast2, G::kLast1}));
  EXPECT_EQ(phrase_grouping(1), (std::vector<G>{G::kFirst1}));
  EXPECT_EQ(phrase_grouping(2), (std::vector<G>{G::kFirst1, G::kLast1}));
  EXPECT_EQ(phrase_grouping(3), (std::vector<G>{G::kFirst1, G::kFirst2, G::kLast1}));
}

// --- filter_instance ------------------------------------------------------

LeadSheet compliant_sheet() {
  Rng rng(3);
  return random_sheet(rng);
}

TEST(FilterInstance, SuspendedFourthIsRejected) {
  LeadSheet s = compliant_sheet();
  s.bars[1].events[0].chord = ChordSymbol::of(0, ChordQuality::kSuspendedFourth);
  const auto r = filter_instance(s);
  ASSERT_TRUE(std::holds_alternative<Rejection>(r));
  EXPECT_EQ(reject_reason_name(std::get<Rejection>(r).reason), "chord quality");
}

TEST(FilterInstance, FiveFourIsRejected) {
  LeadSheet s = compliant_sheet();
  for (auto& b : s.bars) b.time_signature = {5, 4};
  const auto r = filter_instance(s);
  ASSERT_TRUE(std::holds_alternative<Rejection>(r));
  EXPECT_EQ(reject_reason_name(std::get<Rejection>(r).reason), "time signature");
}

TEST(FilterInstance, OtherRejections) {
  LeadSheet s = compliant_sheet();
  s.bars[0].events[0].melody = Pitch{90};
  EXPECT_EQ(std::get<Rejection>(filter_instance(s)).reason, RejectReason::kMelodyRange);
  s = compliant_sheet();
  s.bars[0].events[0].duration.ticks += 30;
  EXPECT_EQ(std::get<Rejection>(filter_instance(s)).reason, RejectReason::kDuration);
  s = compliant_sheet();
  s.bars[0].events.push_back(s.bars[0].events[0]);
  EXPECT_EQ(std::get<Rejection>(filter_instance(s)).reason, RejectReason::kBarCapacity);
  s = compliant_sheet();
  s.bars.resize(3);
  EXPECT_EQ(std::get<Rejection>(filter_instance(s)).reason, RejectReason::kBarCount);
}

TEST(FilterInstance, CompliantIsAcceptedUnchangedAndIdempotent) {
  for (const auto& s : random_corpus(30, 11)) {
    const auto r = filter_instance(s);
    ASSERT_TRUE(std::holds_alternative<LeadSheet>(r));
    EXPECT_EQ(std::get<LeadSheet>(r), s);
    EXPECT_EQ(std::get<LeadSheet>(filter_instance(std::get<LeadSheet>(r))), s);
  }
}

// --- split_dataset --------------------------------------------------------

std::vector<LeadSheet> titled(int count) {
  std::vector<LeadSheet> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)].title = std::to_string(i);
  return out;
}

TEST(SplitDataset, TenSheets) {
  const auto s = split_dataset(titled(10), 1);
  EXPECT_EQ(s.train.size(), 8u);
  EXPECT_EQ(s.validation.size(), 1u);
  EXPECT_EQ(s.test.size(), 1u);
}

TEST(SplitDataset, DeterministicAndPartition) {
  const auto corpus = titled(100);
  const auto a = split_dataset(corpus, 42);
  const auto b = split_dataset(corpus, 42);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.validation, b.validation);
  EXPECT_EQ(a.test, b.test);
  std::multiset<std::string> seen;
  for (const auto* part : {&a.train, &a.validation, &a.test}) {
    for (const auto& s : *part) seen.insert(s.title);
  }
  EXPECT_EQ(seen.size(), 100u);
  EXPECT_EQ(std::set<std::string>(seen.begin(), seen.end()).size(), 100u);
  const auto c = split_dataset(corpus, 43);
  EXPECT_NE(a.train, c.train);
}

TEST(SplitDataset, PaperCorpusSize) {
  // Oracle: integer floor of 80% and 10%, remainder to test.
  const int n = 4776;
  const int train = (n * 4) / 5;
  const int valid = n / 10;
  EXPECT_EQ(train, 3820);
  EXPECT_EQ(valid, 477);
  const auto s = split_dataset(titled(n), 5);
  EXPECT_EQ(static_cast<int>(s.train.size()), train);
  EXPECT_EQ(static_cast<int>(s.validation.size()), valid);
  EXPECT_EQ(static_cast<int>(s.test.size()), n - train - valid);
  EXPECT_EQ(s.test.size(), 479u);
}

TEST(SplitDataset, TooSmallThrows) { EXPECT_THROW(split_dataset(titled(9), 1), InvalidArgument); }

// --- corpus JSON and MusicXML round trips -----------------------------------

TEST(CorpusJson, RoundTripIsExact) {
  const auto corpus = random_corpus(20, 99);
  const std::string text = dump_corpus(corpus);
  const auto back = corpus_from_json(nlohmann::json::parse(text));
  EXPECT_EQ(back, corpus);
  EXPECT_EQ(dump_corpus(back), text);
}

TEST(CorpusJson, RejectsBadInput) {
  EXPECT_THROW(corpus_from_json(nlohmann::json::parse("{\"format\":\"x\"}")), DataError);
  auto j = corpus_to_json(random_corpus(1, 1));
  j["sheets"][0]["bars"][0]["events"][0]["chord"] = "Hm";
  EXPECT_THROW(corpus_from_json(j), DataError);
}

TEST(WriteMusicXml, ReadsBackToTheSameSheet) {
  SyntheticOptions opts;
  opts.melody_rest_probability = 0.3;
  Rng rng(21);
  for (int i = 0; i < 60; ++i) {
    LeadSheet s = random_sheet(rng, opts);
    s.title = "piece " + std::to_string(i);
    const auto result = unfold_and_split(transpose_to_c(parse_musicxml(write_musicxml(s))));
    ASSERT_EQ(result.sheets.size(), 1u);
    EXPECT_EQ(result.sheets[0], s) << "piece " << i;
  }
}

// Fuzz: documents with random keys, meters, chords, durations and ranges. Any
// sheet that passes the filter has to satisfy every type invariant.
TEST(Pipeline, AcceptedSheetsSatisfyInvariants) {
  Rng rng(2024);
  static const char* kinds[] = {"major",    "minor",         "dominant",       "major-seventh",
                                "minor-seventh", "dominant-ninth", "minor-ninth", "diminished",
                                "suspended-fourth", "augmented"};
  static const char* steps[] = {"C", "D", "E", "F", "G", "A", "B"};
  const std::pair<int, int> meters[] = {{4, 4}, {3, 4}, {2, 2}, {2, 4}, {6, 8}, {5, 4}};
  int accepted = 0;
  int rejected = 0;
  for (int doc = 0; doc < 200; ++doc) {
    const auto [beats, beat_type] = meters[rng.below(6)];
    const int divisions = 12;  // eighth-note triplets are not generated here
    const int cap = beats * divisions * 4 / beat_type;
    const int bars = 2 + static_cast<int>(rng.below(12));
    // Each document gets at most a few kinds of defect so that a fair share
    // of them survives the filter.
    const bool odd_durations = rng.below(8) == 0;
    const bool wide_range = rng.below(8) == 0;
    const bool odd_chords = rng.below(8) == 0;
    std::vector<XmlMeasure> ms;
    for (int b = 0; b < bars; ++b) {
      XmlMeasure m;
      if (b == 0) {
        m.prefix = attributes(divisions, static_cast<int>(rng.below(13)) - 6,
                              rng.below(2) ? "major" : "minor", beats, beat_type);
      }
      m.prefix += harmony(steps[rng.below(7)], kinds[rng.below(odd_chords ? 10 : 8)],
                          static_cast<int>(rng.below(3)) - 1);
      int used = 0;
      while (used < cap) {
        static const int lens[] = {3, 6, 9, 12, 18, 24};
        int len = std::min(lens[rng.below(6)], cap - used);
        if (odd_durations && rng.below(4) == 0) len = std::min(5, cap - used);
        if (rng.below(6) == 0) {
          m.notes.push_back(r(len));
        } else {
          const int octave = wide_range ? 2 + static_cast<int>(rng.below(5)) : 4;
          m.notes.push_back(n(steps[rng.below(7)], octave, len));
        }
        used += len;
      }
      ms.push_back(std::move(m));
    }
    RawScore raw;
    try {
      raw = transpose_to_c(parse_musicxml(document(ms)));
    } catch (const DataError&) {
      continue;
    }
    for (const auto& sheet : unfold_and_split(raw).sheets) {
      const auto r = filter_instance(sheet);
      if (!std::holds_alternative<LeadSheet>(r)) {
        ++rejected;
        continue;
      }
      ++accepted;
      const LeadSheet& s = std::get<LeadSheet>(r);
      ASSERT_GE(s.bars.size(), 4u);
      ASSERT_LE(s.bars.size(), 32u);
      for (const auto& bar : s.bars) {
        ASSERT_FALSE(bar.events.empty());
        EXPECT_TRUE(is_permitted_time_signature(bar.time_signature));
        EXPECT_EQ(bar.filled_ticks(), bar.time_signature.bar_ticks());
        for (const auto& e : bar.events) {
          EXPECT_TRUE(is_permitted_duration(e.duration.ticks));
          EXPECT_TRUE(e.chord.is_rest() || is_permitted_quality(e.chord.quality));
          if (e.melody) {
            EXPECT_GE(e.melody->midi, kMinMelodyPitch);
            EXPECT_LE(e.melody->midi, kMaxMelodyPitch);
          }
        }
      }
    }
  }
  EXPECT_GT(accepted, 20);
  EXPECT_GT(rejected, 20);
}

}  // namespace
}  // namespace leadsheet::score
