#include "leadsheet/score/musicxml.h"

#include <algorithm>
#include <boost/property_tree/detail/rapidxml.hpp>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "leadsheet/error.h"

namespace leadsheet::score {

namespace rx = boost::property_tree::detail::rapidxml;
using XmlNode = rx::xml_node<char>;

namespace {

std::string_view text_of(const XmlNode* node) {
  if (node == nullptr) return {};
  return {node->value(), node->value_size()};
}

std::string_view child_text(const XmlNode* node, const char* name) {
  return node == nullptr ? std::string_view{} : text_of(node->first_node(name));
}

std::string_view attr(const XmlNode* node, const char* name) {
  if (node == nullptr) return {};
  const auto* a = node->first_attribute(name);
  return a == nullptr ? std::string_view{} : std::string_view{a->value(), a->value_size()};
}

std::optional<long> to_long(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '+')) s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  long v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Durations and offsets may be decimal in the wild ("1.5"); accept those too.
std::optional<double> to_double(std::string_view s) {
  std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (end == tmp.c_str()) return std::nullopt;
  return v;
}

int step_to_pc(std::string_view step) {
  if (step.size() != 1) return -1;
  switch (step[0]) {
    case 'C': return 0;
    case 'D': return 2;
    case 'E': return 4;
    case 'F': return 5;
    case 'G': return 7;
    case 'A': return 9;
    case 'B': return 11;
    default: return -1;
  }
}

ChordQuality quality_from_kind(std::string_view kind) {
  static const std::map<std::string_view, ChordQuality> kKinds = {
      {"major", ChordQuality::kMajor},
      {"minor", ChordQuality::kMinor},
      {"dominant", ChordQuality::kDominantSeventh},
      {"dominant-seventh", ChordQuality::kDominantSeventh},
      {"major-seventh", ChordQuality::kMajorSeventh},
      {"minor-seventh", ChordQuality::kMinorSeventh},
      {"dominant-ninth", ChordQuality::kDominantNinth},
      {"minor-ninth", ChordQuality::kMinorNinth},
      {"diminished", ChordQuality::kDiminished},
      {"suspended-fourth", ChordQuality::kSuspendedFourth},
      {"augmented", ChordQuality::kAugmented},
      {"half-diminished", ChordQuality::kHalfDiminished},
      {"diminished-seventh", ChordQuality::kDiminishedSeventh},
      {"major-sixth", ChordQuality::kMajorSixth},
      {"minor-sixth", ChordQuality::kMinorSixth},
      {"power", ChordQuality::kPower},
  };
  auto it = kKinds.find(kind);
  return it == kKinds.end() ? ChordQuality::kOther : it->second;
}

// <degree> children alter the chord. Only the two Table-1 alterations get a
// named quality; anything else becomes Other.
ChordQuality apply_degrees(ChordQuality base, const XmlNode* harmony) {
  const XmlNode* degree = harmony->first_node("degree");
  if (degree == nullptr) return base;
  int count = 0;
  bool flat_nine = false;
  bool add_nine = false;
  for (; degree != nullptr; degree = degree->next_sibling("degree")) {
    ++count;
    const auto value = to_long(child_text(degree, "degree-value")).value_or(0);
    const auto alter = to_long(child_text(degree, "degree-alter")).value_or(0);
    const auto type = child_text(degree, "degree-type");
    if (value == 9 && alter == -1 && (type == "add" || type == "alter")) flat_nine = true;
    if (value == 9 && alter == 0 && type == "add") add_nine = true;
  }
  if (count == 1 && flat_nine && base == ChordQuality::kDominantSeventh) {
    return ChordQuality::kSeventhFlatNinth;
  }
  if (count == 1 && add_nine && base == ChordQuality::kMajor) {
    return ChordQuality::kAddedNinth;
  }
  return ChordQuality::kOther;
}

class MeasureReader {
 public:
  explicit MeasureReader(RawScore& score) : score_(score) {}

  void read(const XmlNode* measure) {
    RawMeasure m;
    m.number = std::string(attr(measure, "number"));
    m.implicit = attr(measure, "implicit") == "yes";
    m.time_signature = time_;
    m.endings = open_endings_;

    int pos = 0;
    int last_onset = 0;
    bool key_changed = false;
    for (const XmlNode* c = measure->first_node(); c != nullptr; c = c->next_sibling()) {
      const std::string_view name{c->name(), c->name_size()};
      if (name == "attributes") {
        read_attributes(c, m, key_changed);
      } else if (name == "harmony") {
        read_harmony(c, pos, m);
      } else if (name == "note") {
        read_note(c, pos, last_onset, m);
      } else if (name == "backup") {
        pos -= ticks(child_text(c, "duration"), m);
        pos = std::max(pos, 0);
      } else if (name == "forward") {
        pos += ticks(child_text(c, "duration"), m);
        m.content_ticks = std::max(m.content_ticks, pos);
      } else if (name == "barline") {
        read_barline(c, m);
      } else if (name == "direction") {
        for (const XmlNode* dt = c->first_node("direction-type"); dt != nullptr;
             dt = dt->next_sibling("direction-type")) {
          if (dt->first_node("rehearsal") != nullptr) m.phrase_start = true;
        }
      }
    }
    if (key_changed && !score_.measures.empty() &&
        score_.measures.back().key != key_) {
      ++segment_;
    }
    m.key = key_;
    m.key_segment = segment_;
    m.time_signature = time_;
    score_.measures.push_back(std::move(m));
  }

 private:
  int ticks(std::string_view text, RawMeasure& m) const {
    const double d = to_double(text).value_or(0.0);
    const double exact = d * kTicksPerQuarter / divisions_;
    const int rounded = static_cast<int>(exact + 0.5);
    if (std::abs(exact - rounded) > 1e-9) m.off_grid = true;
    return std::max(rounded, 0);
  }

  void read_attributes(const XmlNode* a, RawMeasure& m, bool& key_changed) {
    if (auto d = to_long(child_text(a, "divisions")); d && *d > 0) divisions_ = *d;
    if (const XmlNode* key = a->first_node("key")) {
      KeySignature k;
      k.fifths = static_cast<int>(to_long(child_text(key, "fifths")).value_or(0));
      const auto mode = child_text(key, "mode");
      if (mode == "major") k.mode = KeyMode::kMajor;
      if (mode == "minor") k.mode = KeyMode::kMinor;
      key_ = k;
      key_changed = true;
    }
    if (const XmlNode* time = a->first_node("time")) {
      // "3+2" style additive meters sum up; they are rejected later anyway.
      int beats = 0;
      std::string_view b = child_text(time, "beats");
      std::size_t start = 0;
      while (start <= b.size()) {
        auto plus = b.find('+', start);
        if (plus == std::string_view::npos) plus = b.size();
        beats += static_cast<int>(to_long(b.substr(start, plus - start)).value_or(0));
        start = plus + 1;
      }
      const int beat_type =
          static_cast<int>(to_long(child_text(time, "beat-type")).value_or(4));
      if (beats > 0 && beat_type > 0) time_ = TimeSignature{beats, beat_type};
      m.time_signature = time_;
    }
  }

  void read_harmony(const XmlNode* h, int pos, RawMeasure& m) {
    RawHarmony rh;
    rh.onset = pos;
    if (auto off = child_text(h, "offset"); !off.empty()) {
      rh.onset = std::max(0, pos + ticks(off, m));
    }
    const XmlNode* kind = h->first_node("kind");
    const std::string_view kind_text = text_of(kind);
    const XmlNode* root = h->first_node("root");
    if (kind_text == "none" || root == nullptr) {
      rh.chord = ChordSymbol::rest();
      rh.label = "N.C.";
      if (kind_text != "none") {
        // Functional (roman numeral) harmony without a root: unusable.
        rh.chord = ChordSymbol::of(0, ChordQuality::kOther);
        rh.label = "?";
      }
      m.harmonies.push_back(std::move(rh));
      return;
    }
    int pc = step_to_pc(child_text(root, "root-step"));
    if (pc < 0) pc = 0;
    pc += static_cast<int>(to_long(child_text(root, "root-alter")).value_or(0));
    pc = ((pc % 12) + 12) % 12;
    const ChordQuality q = apply_degrees(quality_from_kind(kind_text), h);
    rh.chord = ChordSymbol::of(pc, q);
    const std::string_view notated = attr(kind, "text");
    rh.label = std::string(pitch_class_name(pc)) +
               std::string(notated.empty() ? quality_suffix(q) : notated);
    m.harmonies.push_back(std::move(rh));
  }

  void read_note(const XmlNode* n, int& pos, int& last_onset, RawMeasure& m) {
    if (n->first_node("grace") != nullptr || n->first_node("cue") != nullptr) return;
    RawNote note;
    note.duration = ticks(child_text(n, "duration"), m);
    const bool chord_member = n->first_node("chord") != nullptr;
    note.onset = chord_member ? last_onset : pos;
    if (!chord_member) {
      last_onset = pos;
      pos += note.duration;
    }
    m.content_ticks = std::max(m.content_ticks, note.onset + note.duration);
    if (auto v = to_long(child_text(n, "voice"))) note.voice = static_cast<int>(*v);
    if (const XmlNode* p = n->first_node("pitch")) {
      const int pc = step_to_pc(child_text(p, "step"));
      const long alter = to_long(child_text(p, "alter")).value_or(0);
      const long octave = to_long(child_text(p, "octave")).value_or(4);
      if (pc >= 0) note.midi = static_cast<int>((octave + 1) * 12 + pc + alter);
    }
    for (const XmlNode* t = n->first_node("tie"); t != nullptr; t = t->next_sibling("tie")) {
      const auto type = attr(t, "type");
      if (type == "start") note.tie_start = true;
      if (type == "stop") note.tie_stop = true;
    }
    m.notes.push_back(note);
  }

  void read_barline(const XmlNode* b, RawMeasure& m) {
    const auto location = attr(b, "location");
    const bool right = location.empty() || location == "right";
    const auto style = child_text(b, "bar-style");
    if (right && (style == "light-light" || style == "light-heavy")) m.phrase_end = true;
    if (const XmlNode* r = b->first_node("repeat")) {
      if (attr(r, "direction") == "forward") {
        m.repeat_forward = true;
      } else if (attr(r, "direction") == "backward") {
        m.repeat_backward = true;
        if (auto t = to_long(attr(r, "times")); t && *t >= 2) {
          m.repeat_times = static_cast<int>(*t);
        }
      }
    }
    if (const XmlNode* e = b->first_node("ending")) {
      const auto type = attr(e, "type");
      if (type == "start") {
        open_endings_.clear();
        std::string_view nums = attr(e, "number");
        std::size_t start = 0;
        while (start < nums.size()) {
          auto comma = nums.find(',', start);
          if (comma == std::string_view::npos) comma = nums.size();
          if (auto v = to_long(nums.substr(start, comma - start))) {
            open_endings_.push_back(static_cast<int>(*v));
          }
          start = comma + 1;
        }
        m.endings = open_endings_;
      } else {
        // stop / discontinue close the volta after this measure.
        if (m.endings.empty()) m.endings = open_endings_;
        open_endings_.clear();
      }
    }
  }

  RawScore& score_;
  long divisions_ = 1;
  KeySignature key_{};
  TimeSignature time_{4, 4};
  int segment_ = 0;
  std::vector<int> open_endings_;
};

bool has_third(ChordQuality q, int third) {
  const auto iv = chord_intervals(q);
  return std::find(iv.begin(), iv.end(), third) != iv.end();
}

// Segments without a notated mode: major vs relative minor, decided by which
// tonic chord occurs more often (ties go to major).
void detect_modes(RawScore& score) {
  std::map<int, std::pair<int, int>> votes;  // segment -> (major, minor)
  for (const auto& m : score.measures) {
    for (const auto& h : m.harmonies) {
      if (h.chord.is_rest()) continue;
      const int major_tonic = ((m.key.fifths * 7) % 12 + 12) % 12;
      const int minor_tonic = (major_tonic + 9) % 12;
      auto& v = votes[m.key_segment];
      if (*h.chord.root == major_tonic && has_third(h.chord.quality, 4)) ++v.first;
      if (*h.chord.root == minor_tonic && has_third(h.chord.quality, 3)) ++v.second;
    }
  }
  for (auto& m : score.measures) {
    if (m.key.mode) continue;
    const auto& v = votes[m.key_segment];
    m.key.mode = v.second > v.first ? KeyMode::kMinor : KeyMode::kMajor;
  }
}

}  // namespace

int KeySignature::tonic() const {
  const int major_tonic = ((fifths * 7) % 12 + 12) % 12;
  return mode.value_or(KeyMode::kMajor) == KeyMode::kMinor ? (major_tonic + 9) % 12
                                                           : major_tonic;
}

int RawScore::key_segment_count() const {
  return measures.empty() ? 0 : measures.back().key_segment + 1;
}

RawScore parse_musicxml(std::string_view document) {
  std::vector<char> buf(document.begin(), document.end());
  buf.push_back('\0');
  rx::xml_document<char> doc;
  try {
    doc.parse<rx::parse_validate_closing_tags | rx::parse_trim_whitespace>(buf.data());
  } catch (const rx::parse_error& e) {
    const char* where = e.where<char>();
    std::size_t line = 1;
    if (where != nullptr && where >= buf.data() && where < buf.data() + buf.size()) {
      // The parser writes terminators into buf, so count on the original text.
      const auto offset = static_cast<std::size_t>(where - buf.data());
      const auto prefix = document.substr(0, offset);
      line += static_cast<std::size_t>(std::count(prefix.begin(), prefix.end(), '\n'));
    }
    throw ParseError(std::string("malformed MusicXML: ") + e.what(), line);
  }

  const XmlNode* root = doc.first_node("score-partwise");
  if (root == nullptr) {
    throw UnusableSourceError("unusable source: not a partwise MusicXML score");
  }

  RawScore score;
  if (const XmlNode* work = root->first_node("work")) {
    score.title = std::string(child_text(work, "work-title"));
  }
  if (score.title.empty()) score.title = std::string(child_text(root, "movement-title"));

  const XmlNode* chosen = nullptr;
  for (const XmlNode* part = root->first_node("part"); part != nullptr;
       part = part->next_sibling("part")) {
    for (const XmlNode* m = part->first_node("measure"); m && !chosen;
         m = m->next_sibling("measure")) {
      if (m->first_node("harmony") != nullptr) chosen = part;
    }
    if (chosen) break;
  }
  if (chosen == nullptr) throw UnusableSourceError("unusable source: no chord symbols");

  MeasureReader reader(score);
  for (const XmlNode* m = chosen->first_node("measure"); m != nullptr;
       m = m->next_sibling("measure")) {
    reader.read(m);
  }
  const bool has_melody = std::any_of(score.measures.begin(), score.measures.end(),
                                      [](const RawMeasure& m) {
                                        return std::any_of(
                                            m.notes.begin(), m.notes.end(),
                                            [](const RawNote& n) { return n.midi.has_value(); });
                                      });
  if (!has_melody) throw UnusableSourceError("unusable source: no melody notes");
  detect_modes(score);
  return score;
}

RawScore read_musicxml_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_musicxml(ss.str());
}

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string_view kind_of(ChordQuality q) {
  switch (q) {
    case ChordQuality::kMajor: return "major";
    case ChordQuality::kMinor: return "minor";
    case ChordQuality::kDominantSeventh: return "dominant";
    case ChordQuality::kMajorSeventh: return "major-seventh";
    case ChordQuality::kMinorSeventh: return "minor-seventh";
    case ChordQuality::kDominantNinth: return "dominant-ninth";
    case ChordQuality::kMinorNinth: return "minor-ninth";
    case ChordQuality::kDiminished: return "diminished";
    case ChordQuality::kSuspendedFourth: return "suspended-fourth";
    case ChordQuality::kAugmented: return "augmented";
    case ChordQuality::kHalfDiminished: return "half-diminished";
    case ChordQuality::kDiminishedSeventh: return "diminished-seventh";
    case ChordQuality::kMajorSixth: return "major-sixth";
    case ChordQuality::kMinorSixth: return "minor-sixth";
    case ChordQuality::kPower: return "power";
    default: return "other";
  }
}

struct NoteType {
  std::string_view type;
  int dots = 0;
  bool triplet = false;
};

std::optional<NoteType> note_type(int ticks) {
  switch (ticks) {
    case 96: return NoteType{"whole"};
    case 72: return NoteType{"half", 1};
    case 48: return NoteType{"half"};
    case 36: return NoteType{"quarter", 1};
    case 24: return NoteType{"quarter"};
    case 18: return NoteType{"eighth", 1};
    case 16: return NoteType{"quarter", 0, true};
    case 12: return NoteType{"eighth"};
    case 8: return NoteType{"eighth", 0, true};
    case 6: return NoteType{"16th"};
    default: return std::nullopt;
  }
}

void write_harmony(std::ostringstream& os, const ChordSymbol& c) {
  os << "      <harmony>\n";
  if (c.is_rest()) {
    os << "        <kind>none</kind>\n";
  } else {
    const std::string_view name = pitch_class_name(*c.root);
    os << "        <root><root-step>" << name[0] << "</root-step>";
    if (name.size() > 1) os << "<root-alter>1</root-alter>";
    os << "</root>\n";
    if (c.quality == ChordQuality::kSeventhFlatNinth) {
      os << "        <kind text=\"7b9\">dominant</kind>\n"
            "        <degree><degree-value>9</degree-value><degree-alter>-1</degree-alter>"
            "<degree-type>add</degree-type></degree>\n";
    } else if (c.quality == ChordQuality::kAddedNinth) {
      os << "        <kind text=\"add9\">major</kind>\n"
            "        <degree><degree-value>9</degree-value><degree-alter>0</degree-alter>"
            "<degree-type>add</degree-type></degree>\n";
    } else {
      os << "        <kind>" << kind_of(c.quality) << "</kind>\n";
    }
  }
  os << "      </harmony>\n";
}

void write_pitch(std::ostringstream& os, int midi) {
  static constexpr std::array<std::pair<char, int>, 12> kSpelling = {{
      {'C', 0}, {'C', 1}, {'D', 0}, {'D', 1}, {'E', 0}, {'F', 0},
      {'F', 1}, {'G', 0}, {'G', 1}, {'A', 0}, {'A', 1}, {'B', 0}}};
  const auto [step, alter] = kSpelling[midi % 12];
  os << "        <pitch><step>" << step << "</step>";
  if (alter != 0) os << "<alter>" << alter << "</alter>";
  os << "<octave>" << (midi / 12 - 1) << "</octave></pitch>\n";
}

}  // namespace

std::string write_musicxml(const LeadSheet& sheet) {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
        "<!DOCTYPE score-partwise PUBLIC \"-//Recordare//DTD MusicXML 3.1 Partwise//EN\" "
        "\"http://www.musicxml.org/dtds/partwise.dtd\">\n"
        "<score-partwise version=\"3.1\">\n";
  os << "  <work><work-title>" << xml_escape(sheet.title) << "</work-title></work>\n";
  os << "  <part-list><score-part id=\"P1\"><part-name>Lead Sheet</part-name></score-part>"
        "</part-list>\n";
  os << "  <part id=\"P1\">\n";
  std::optional<ChordSymbol> current_chord;
  std::optional<TimeSignature> current_ts;
  for (std::size_t i = 0; i < sheet.bars.size(); ++i) {
    const Bar& bar = sheet.bars[i];
    os << "    <measure number=\"" << (i + 1) << "\">\n";
    if (i == 0 || bar.time_signature != *current_ts) {
      os << "      <attributes>\n";
      if (i == 0) {
        os << "        <divisions>" << kTicksPerQuarter << "</divisions>\n"
           << "        <key><fifths>0</fifths><mode>"
           << (sheet.key == KeyMode::kMajor ? "major" : "minor") << "</mode></key>\n";
      }
      os << "        <time><beats>" << bar.time_signature.numerator << "</beats><beat-type>"
         << bar.time_signature.denominator << "</beat-type></time>\n";
      if (i == 0) os << "        <clef><sign>G</sign><line>2</line></clef>\n";
      os << "      </attributes>\n";
      current_ts = bar.time_signature;
    }
    if (bar.grouping == Grouping::kFirst1 && i > 0) {
      // Rehearsal marks re-create the phrase structure when read back.
      os << "      <direction placement=\"above\"><direction-type><rehearsal>"
         << "P</rehearsal></direction-type></direction>\n";
    }
    for (const Event& e : bar.events) {
      if (!current_chord || !(*current_chord == e.chord)) {
        write_harmony(os, e.chord);
        current_chord = e.chord;
      }
      os << "      <note>\n";
      if (e.melody) {
        write_pitch(os, e.melody->midi);
      } else {
        os << "        <rest/>\n";
      }
      os << "        <duration>" << e.duration.ticks << "</duration>\n"
         << "        <voice>1</voice>\n";
      if (auto t = note_type(e.duration.ticks)) {
        os << "        <type>" << t->type << "</type>\n";
        for (int d = 0; d < t->dots; ++d) os << "        <dot/>\n";
        if (t->triplet) {
          os << "        <time-modification><actual-notes>3</actual-notes>"
                "<normal-notes>2</normal-notes></time-modification>\n";
        }
      }
      os << "      </note>\n";
    }
    const bool last = i + 1 == sheet.bars.size();
    if (last) {
      os << "      <barline location=\"right\"><bar-style>light-heavy</bar-style></barline>\n";
    } else if (bar.grouping == Grouping::kLast1) {
      os << "      <barline location=\"right\"><bar-style>light-light</bar-style></barline>\n";
    }
    os << "    </measure>\n";
  }
  os << "  </part>\n</score-partwise>\n";
  return os.str();
}

}  // namespace leadsheet::score
