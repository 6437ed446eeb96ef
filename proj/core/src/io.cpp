#include "mpp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "mpp/error.hpp"

namespace mpp {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        const std::size_t b = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
        if (i > b) out.push_back(s.substr(b, i - b));
    }
    return out;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        ++line_no;
        fn(line_no, line);
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
}

bool parse_number(std::string_view s, double& out) {
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size() && std::isfinite(out);
}

// "key = value" document with strict key checking.
class KeyValues {
public:
    explicit KeyValues(std::string_view text) {
        for_each_line(text, [&](std::size_t n, std::string_view raw) {
            auto line = trim(raw);
            if (line.empty() || line.front() == '#') return;
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) parse_fail(n, "expected 'key = value'");
            const std::string key(trim(line.substr(0, eq)));
            const std::string value(trim(line.substr(eq + 1)));
            if (key.empty()) parse_fail(n, "empty key");
            if (entries_.count(key)) parse_fail(n, "duplicate key '" + key + "'");
            entries_[key] = {value, n};
        });
    }

    void expect_version(const char* what) {
        auto it = entries_.find("format_version");
        if (it == entries_.end()) parse_fail(1, std::string(what) + ": missing format_version");
        double v = 0;
        if (!parse_number(it->second.value, v) || v != kFormatVersion) {
            parse_fail(it->second.line, std::string(what) + ": unsupported format_version '" + it->second.value +
                                            "' (expected " + std::to_string(kFormatVersion) + ")");
        }
        used_.insert({"format_version", true});
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    const std::string* raw(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return nullptr;
        used_[key] = true;
        return &it->second.value;
    }

    std::size_t line_of(const std::string& key) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.line;
    }

    void number(const std::string& key, double& out) {
        if (const auto* v = raw(key)) {
            if (!parse_number(*v, out)) parse_fail(line_of(key), "'" + key + "' is not a finite number");
        }
    }

    void integer(const std::string& key, int& out) {
        double d = out;
        number(key, d);
        if (d != std::floor(d) || std::abs(d) > 1e9) parse_fail(line_of(key), "'" + key + "' must be an integer");
        out = static_cast<int>(d);
    }

    void range(const std::string& key, Range& out) {
        if (const auto* v = raw(key)) {
            const auto parts = split_ws(*v);
            if (parts.size() != 2 || !parse_number(parts[0], out.lo) || !parse_number(parts[1], out.hi)) {
                parse_fail(line_of(key), "'" + key + "' needs two numbers 'lo hi'");
            }
        }
    }

    template <typename E>
    void choice(const std::string& key, E& out, std::initializer_list<std::pair<const char*, E>> options) {
        const auto* v = raw(key);
        if (!v) return;
        for (const auto& [name, value] : options) {
            if (*v == name) {
                out = value;
                return;
            }
        }
        parse_fail(line_of(key), "'" + key + "' has unknown value '" + *v + "'");
    }

    void reject_unknown() const {
        for (const auto& [key, entry] : entries_) {
            if (!used_.count(key)) parse_fail(entry.line, "unknown key '" + key + "'");
        }
    }

private:
    struct Entry {
        std::string value;
        std::size_t line = 0;
    };
    std::map<std::string, Entry> entries_;
    std::map<std::string, bool> used_;
};

class KeyValueWriter {
public:
    explicit KeyValueWriter(const char* title) { out_ << "# " << title << "\nformat_version = " << kFormatVersion << "\n"; }
    KeyValueWriter& put(const std::string& key, const std::string& value) {
        out_ << key << " = " << value << "\n";
        return *this;
    }
    KeyValueWriter& num(const std::string& key, double v) { return put(key, format_exact(v)); }
    KeyValueWriter& range(const std::string& key, const Range& r) {
        return put(key, format_exact(r.lo) + " " + format_exact(r.hi));
    }
    std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;
};

// --- JSON helpers ---------------------------------------------------------

json num_or_null(double x) { return std::isnan(x) ? json(nullptr) : json(x); }

double get_num(const json& j, const char* key, std::size_t line = 0) {
    if (!j.contains(key)) parse_fail(line, std::string("missing field '") + key + "'");
    const auto& v = j.at(key);
    if (v.is_null()) return kNaN;
    if (!v.is_number()) parse_fail(line, std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

Vec2 get_vec2(const json& j, std::size_t line = 0) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        parse_fail(line, "expected [x, y]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

json vec2_json(Vec2 v) { return json::array({v.x, v.y}); }

json parse_json(std::string_view text, std::size_t line = 1) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        parse_fail(line, std::string("malformed JSON: ") + e.what());
    }
}

template <typename E>
E enum_from(const std::string& s, std::initializer_list<std::pair<const char*, E>> options, std::size_t line,
            const char* what) {
    for (const auto& [name, value] : options) {
        if (s == name) return value;
    }
    parse_fail(line, std::string("unknown ") + what + " '" + s + "'");
}

const std::initializer_list<std::pair<const char*, TaskKind>> kTaskKinds = {
    {"buttons", TaskKind::Buttons},
    {"erase", TaskKind::Erase},
    {"hit_moving", TaskKind::HitMoving},
    {"track_moving", TaskKind::TrackMoving}};

// --- hand-written JSON lines for logs (controls significant digits) --------

void put_num(std::string& out, double x) { out += std::isnan(x) ? "null" : format_sig9(x); }

void put_pair(std::string& out, Vec2 v) {
    out += '[';
    put_num(out, v.x);
    out += ',';
    put_num(out, v.y);
    out += ']';
}

std::string frame_line(const FrameOutput& f) {
    std::string s = "{\"type\":\"frame\",\"t\":";
    put_num(s, f.t);
    s += ",\"ptr\":";
    put_pair(s, f.pointer);
    s += ",\"frozen\":";
    s += f.frozen ? "true" : "false";
    s += ",\"h\":";
    put_num(s, f.h);
    s += ",\"H\":";
    put_num(s, f.H);
    s += ",\"uv\":";
    put_pair(s, {f.uv.u, f.uv.v});
    s += ",\"sat\":";
    s += f.saturated ? "true" : "false";
    s += ",\"fb\":{\"r\":";
    put_num(s, f.feedback.circle_radius);
    s += ",\"clutch\":";
    s += f.feedback.circle_clutching ? "true" : "false";
    s += ",\"rings\":";
    if (f.feedback.rings) {
        s += "{\"now\":";
        put_pair(s, f.feedback.rings->pos_now);
        s += ",\"prev\":";
        put_pair(s, f.feedback.rings->pos_prev);
        s += ",\"w\":";
        put_num(s, f.feedback.rings->thickness);
        s += '}';
    } else {
        s += "null";
    }
    s += ",\"pred\":";
    put_pair(s, f.feedback.prediction_end);
    s += "}}";
    return s;
}

std::string event_line(const LogEvent& e) {
    std::string s = "{\"type\":\"event\",\"kind\":\"";
    s += to_string(e.kind);
    s += "\",\"t\":";
    put_num(s, e.t);
    s += ",\"run\":" + std::to_string(e.run) + ",\"ptr\":";
    put_pair(s, e.pointer);
    s += '}';
    return s;
}

bool get_bool(const json& j, const char* key, std::size_t line) {
    if (!j.contains(key) || !j.at(key).is_boolean()) parse_fail(line, std::string("field '") + key + "' must be a boolean");
    return j.at(key).get<bool>();
}

FrameOutput frame_from(const json& j, std::size_t line) {
    FrameOutput f;
    f.t = get_num(j, "t", line);
    if (!j.contains("ptr")) parse_fail(line, "missing field 'ptr'");
    f.pointer = get_vec2(j.at("ptr"), line);
    f.frozen = get_bool(j, "frozen", line);
    f.h = get_num(j, "h", line);
    f.H = get_num(j, "H", line);
    if (!j.contains("uv")) parse_fail(line, "missing field 'uv'");
    const Vec2 uv = get_vec2(j.at("uv"), line);
    f.uv = {uv.x, uv.y};
    f.saturated = get_bool(j, "sat", line);
    if (!j.contains("fb") || !j.at("fb").is_object()) parse_fail(line, "missing object 'fb'");
    const json& fb = j.at("fb");
    f.feedback.circle_radius = get_num(fb, "r", line);
    f.feedback.circle_clutching = get_bool(fb, "clutch", line);
    if (fb.contains("rings") && !fb.at("rings").is_null()) {
        const json& r = fb.at("rings");
        if (!r.contains("now") || !r.contains("prev")) parse_fail(line, "rings need 'now' and 'prev'");
        f.feedback.rings = Rings{get_vec2(r.at("now"), line), get_vec2(r.at("prev"), line), get_num(r, "w", line)};
    }
    if (!fb.contains("pred")) parse_fail(line, "missing field 'pred'");
    f.feedback.prediction_end = get_vec2(fb.at("pred"), line);
    return f;
}

LogEvent event_from(const json& j, std::size_t line) {
    LogEvent e;
    if (!j.contains("kind") || !j.at("kind").is_string()) parse_fail(line, "event needs a 'kind'");
    e.kind = enum_from<EventKind>(j.at("kind").get<std::string>(),
                                  {{"run_start", EventKind::RunStart},
                                   {"run_end", EventKind::RunEnd},
                                   {"select", EventKind::Select},
                                   {"timeout", EventKind::Timeout}},
                                  line, "event kind");
    e.t = get_num(j, "t", line);
    const double run = get_num(j, "run", line);
    if (run != std::floor(run) || run < 0) parse_fail(line, "event 'run' must be a non-negative integer");
    e.run = static_cast<int>(run);
    if (j.contains("ptr")) e.pointer = get_vec2(j.at("ptr"), line);
    return e;
}

json header_for(const char* format) {
    json h;
    h["format"] = format;
    h["version"] = kFormatVersion;
    return h;
}

void check_header(const json& h, const char* format) {
    if (!h.is_object() || h.value("format", "") != format) {
        parse_fail(1, std::string("header does not declare format '") + format + "'");
    }
    if (!h.contains("version") || h.at("version") != kFormatVersion) {
        parse_fail(1, "unsupported version (expected " + std::to_string(kFormatVersion) + ")");
    }
}

}  // namespace

// --- numbers ---------------------------------------------------------------

std::string format_exact(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string format_sig9(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 9);
    return std::string(buf, res.ptr);
}

double quantize9(double x) {
    if (!std::isfinite(x)) return x;
    const std::string s = format_sig9(x);
    double out = 0;
    std::from_chars(s.data(), s.data() + s.size(), out);
    return out;
}

// --- config ----------------------------------------------------------------

std::string serialize_config(const TechniqueConfig& c) {
    std::string knots;
    for (const auto& k : c.scheme.knots()) {
        if (!knots.empty()) knots += ' ';
        knots += format_exact(k.h) + ":" + format_exact(k.H);
    }
    KeyValueWriter w("multi-precision pointing technique config");
    w.put("technique", c.technique())
        .put("mapping", to_string(c.mapping))
        .put("adjustment", to_string(c.adjustment))
        .put("scheme.kind", to_string(c.scheme.kind()))
        .put("scheme.knots", knots)
        .range("volume.vertical", c.volume.vertical)
        .range("volume.radial", c.volume.radial)
        .range("volume.planar_x", c.volume.planar_x)
        .range("volume.planar_z", c.volume.planar_z)
        .range("volume.azimuth", c.volume.azimuth)
        .range("volume.elevation", c.volume.elevation)
        .num("display.width", c.display.width)
        .num("display.height", c.display.height)
        .num("clutch.window_n", c.clutch.window_n)
        .num("clutch.tau", c.clutch.tau)
        .num("clutch.min_pairs", c.clutch.min_pairs)
        .put("clutch.inequality", to_string(c.clutch.inequality))
        .num("feedback.circle_radius", c.feedback.circle_radius)
        .num("feedback.ring_gain", c.feedback.ring_gain)
        .num("gain_base", c.gain_base)
        .num("smoothing_alpha", c.smoothing_alpha)
        .num("prediction_lead", c.prediction_lead)
        .num("speed_threshold", c.speed_threshold)
        .num("hysteresis_margin", c.hysteresis_margin);
    return w.str();
}

TechniqueConfig parse_config(std::string_view text) {
    KeyValues kv(text);
    kv.expect_version("config");
    TechniqueConfig c;

    kv.choice<Mapping>("mapping", c.mapping, {{"absolute", Mapping::Absolute}, {"relative", Mapping::Relative}});
    kv.choice<Adjustment>("adjustment", c.adjustment,
                          {{"vertical", Adjustment::Vertical}, {"horizontal", Adjustment::Horizontal}});
    if (const auto* code = kv.raw("technique")) {
        if (*code != c.technique()) {
            parse_fail(kv.line_of("technique"), "technique '" + *code + "' disagrees with mapping/adjustment (" +
                                                    c.technique() + ")");
        }
    }

    auto kind = PrecisionScheme::Kind::Segmented;
    kv.choice<PrecisionScheme::Kind>("scheme.kind", kind,
                                     {{"segmented", PrecisionScheme::Kind::Segmented},
                                      {"linear", PrecisionScheme::Kind::Linear},
                                      {"nonlinear", PrecisionScheme::Kind::NonLinear}});
    if (const auto* raw = kv.raw("scheme.knots")) {
        std::vector<Knot> knots;
        for (auto tok : split_ws(*raw)) {
            const auto colon = tok.find(':');
            Knot k;
            if (colon == std::string_view::npos || !parse_number(tok.substr(0, colon), k.h) ||
                !parse_number(tok.substr(colon + 1), k.H)) {
                parse_fail(kv.line_of("scheme.knots"), "knots are written 'h:H', got '" + std::string(tok) + "'");
            }
            knots.push_back(k);
        }
        try {
            switch (kind) {
                case PrecisionScheme::Kind::Segmented: c.scheme = PrecisionScheme::segmented(knots); break;
                case PrecisionScheme::Kind::Linear:
                    if (knots.size() != 2) parse_fail(kv.line_of("scheme.knots"), "linear scheme takes two knots");
                    c.scheme = PrecisionScheme::linear(knots[0], knots[1]);
                    break;
                case PrecisionScheme::Kind::NonLinear: c.scheme = PrecisionScheme::nonlinear(knots); break;
            }
        } catch (const Error& e) {
            if (e.code() == ErrorCode::ParseError) throw;
            parse_fail(kv.line_of("scheme.knots"), e.what());
        }
    } else if (kv.has("scheme.kind")) {
        switch (kind) {
            case PrecisionScheme::Kind::Segmented: c.scheme = PrecisionScheme::default_segmented(); break;
            case PrecisionScheme::Kind::Linear: c.scheme = PrecisionScheme::default_linear(); break;
            case PrecisionScheme::Kind::NonLinear: c.scheme = PrecisionScheme::default_nonlinear(); break;
        }
    }

    kv.range("volume.vertical", c.volume.vertical);
    kv.range("volume.radial", c.volume.radial);
    kv.range("volume.planar_x", c.volume.planar_x);
    kv.range("volume.planar_z", c.volume.planar_z);
    kv.range("volume.azimuth", c.volume.azimuth);
    kv.range("volume.elevation", c.volume.elevation);
    kv.number("display.width", c.display.width);
    kv.number("display.height", c.display.height);
    kv.integer("clutch.window_n", c.clutch.window_n);
    kv.number("clutch.tau", c.clutch.tau);
    kv.integer("clutch.min_pairs", c.clutch.min_pairs);
    kv.choice<ClutchInequality>("clutch.inequality", c.clutch.inequality,
                                {{"below", ClutchInequality::Below}, {"above", ClutchInequality::Above}});
    kv.number("feedback.circle_radius", c.feedback.circle_radius);
    kv.number("feedback.ring_gain", c.feedback.ring_gain);
    kv.number("gain_base", c.gain_base);
    kv.number("smoothing_alpha", c.smoothing_alpha);
    kv.number("prediction_lead", c.prediction_lead);
    kv.number("speed_threshold", c.speed_threshold);
    kv.number("hysteresis_margin", c.hysteresis_margin);
    kv.reject_unknown();
    c.validate();
    return c;
}

std::string config_hash(const TechniqueConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : serialize_config(cfg)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// --- policy ----------------------------------------------------------------

std::string serialize_policy(const ControllerPolicy& p) {
    KeyValueWriter w("scripted pointing controller policy");
    w.put("strategy", to_string(p.strategy))
        .num("h_fixed", p.h_fixed)
        .num("h_coarse", p.h_coarse)
        .num("h_fine", p.h_fine)
        .num("approach_gain", p.approach_gain)
        .num("correction_gain", p.correction_gain)
        .num("switch_radius_px", p.switch_radius_px)
        .num("stop_radius_px", p.stop_radius_px)
        .num("dwell_frames", p.dwell_frames)
        .num("run_timeout_s", p.run_timeout_s)
        .num("sample_rate", p.sample_rate)
        .num("h_rate", p.h_rate);
    return w.str();
}

ControllerPolicy parse_policy(std::string_view text) {
    KeyValues kv(text);
    kv.expect_version("policy");
    ControllerPolicy p;
    kv.choice<ControllerPolicy::Strategy>(
        "strategy", p.strategy,
        {{"fixed", ControllerPolicy::Strategy::Fixed}, {"two_phase", ControllerPolicy::Strategy::TwoPhase}});
    kv.number("h_fixed", p.h_fixed);
    kv.number("h_coarse", p.h_coarse);
    kv.number("h_fine", p.h_fine);
    kv.number("approach_gain", p.approach_gain);
    kv.number("correction_gain", p.correction_gain);
    kv.number("switch_radius_px", p.switch_radius_px);
    kv.number("stop_radius_px", p.stop_radius_px);
    kv.integer("dwell_frames", p.dwell_frames);
    kv.number("run_timeout_s", p.run_timeout_s);
    kv.number("sample_rate", p.sample_rate);
    kv.number("h_rate", p.h_rate);
    kv.reject_unknown();
    p.validate();
    return p;
}

// --- manifest --------------------------------------------------------------

std::string serialize_manifest(const RunManifest& m) {
    std::string seeds;
    for (auto s : m.seeds) {
        if (!seeds.empty()) seeds += ' ';
        seeds += std::to_string(s);
    }
    KeyValueWriter w("simulation run manifest");
    w.put("label", m.label)
        .put("config", m.config.generic_string())
        .put("task", m.task.generic_string())
        .put("policy", m.policy.generic_string())
        .put("seeds", seeds)
        .put("output_dir", m.output_dir.generic_string())
        .num("tremor.amplitude", m.tremor.amplitude)
        .num("tremor.center_hz", m.tremor.center_hz)
        .num("tremor.bandwidth_hz", m.tremor.bandwidth_hz);
    return w.str();
}

RunManifest parse_manifest(std::string_view text) {
    KeyValues kv(text);
    kv.expect_version("manifest");
    RunManifest m;
    auto path = [&](const char* key, std::filesystem::path& out) {
        const auto* v = kv.raw(key);
        if (!v || v->empty()) parse_fail(kv.line_of(key), std::string("manifest needs '") + key + "'");
        out = *v;
    };
    if (const auto* v = kv.raw("label")) m.label = *v;
    if (m.label.empty() || m.label.find_first_of("/\\ ") != std::string::npos) {
        parse_fail(kv.line_of("label"), "label must be a non-empty word");
    }
    path("config", m.config);
    path("task", m.task);
    path("policy", m.policy);
    if (const auto* v = kv.raw("output_dir")) m.output_dir = *v;
    if (const auto* v = kv.raw("seeds")) {
        m.seeds.clear();
        for (auto tok : split_ws(*v)) {
            std::uint64_t s = 0;
            const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), s);
            if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
                parse_fail(kv.line_of("seeds"), "seeds must be non-negative integers");
            }
            m.seeds.push_back(s);
        }
        if (m.seeds.empty()) parse_fail(kv.line_of("seeds"), "at least one seed required");
    }
    kv.number("tremor.amplitude", m.tremor.amplitude);
    kv.number("tremor.center_hz", m.tremor.center_hz);
    kv.number("tremor.bandwidth_hz", m.tremor.bandwidth_hz);
    kv.reject_unknown();
    return m;
}

RunManifest resolve_paths(RunManifest m, const std::filesystem::path& base_dir) {
    auto fix = [&](std::filesystem::path& p) {
        if (p.is_relative()) p = base_dir / p;
    };
    fix(m.config);
    fix(m.task);
    fix(m.policy);
    return m;
}

// --- task ------------------------------------------------------------------

std::string serialize_task(const TaskSpec& t) {
    json j = header_for("mpp-task");
    j["kind"] = to_string(t.kind);
    j["display"] = json::array({t.display.width, t.display.height});
    switch (t.kind) {
        case TaskKind::Buttons: {
            json runs = json::array();
            for (const auto& r : t.runs) {
                json buttons = json::array();
                for (const auto& b : r.buttons) buttons.push_back(json::array({b.x, b.y, b.w, b.h}));
                runs.push_back({{"buttons", buttons}, {"target", r.target}, {"start", vec2_json(r.start)}});
            }
            j["runs"] = runs;
            break;
        }
        case TaskKind::Erase: {
            json lines = json::array();
            for (const auto& line : t.polylines) {
                json pts = json::array();
                for (const auto& p : line) pts.push_back(vec2_json(p));
                lines.push_back(pts);
            }
            j["polylines"] = lines;
            j["eraser_radius"] = t.eraser_radius;
            j["start"] = vec2_json(t.start);
            break;
        }
        case TaskKind::HitMoving:
        case TaskKind::TrackMoving: {
            json tracks = json::array();
            for (const auto& tr : t.tracks) {
                tracks.push_back({{"direction", to_string(tr.direction)},
                                  {"start", vec2_json(tr.start)},
                                  {"end", vec2_json(tr.end)},
                                  {"speed", tr.speed},
                                  {"radius", tr.radius}});
            }
            j["tracks"] = tracks;
            break;
        }
    }
    return j.dump(2) + "\n";
}

TaskSpec parse_task(std::string_view text) {
    const json j = parse_json(text);
    check_header(j, "mpp-task");
    TaskSpec t;
    try {
        t.kind = enum_from<TaskKind>(j.at("kind").get<std::string>(), kTaskKinds, 1, "task kind");
        const Vec2 d = get_vec2(j.at("display"));
        t.display = {d.x, d.y};
        switch (t.kind) {
            case TaskKind::Buttons:
                for (const auto& r : j.at("runs")) {
                    ButtonRun run;
                    for (const auto& b : r.at("buttons")) {
                        if (!b.is_array() || b.size() != 4) parse_fail(1, "buttons are [x, y, w, h]");
                        run.buttons.push_back({b[0].get<double>(), b[1].get<double>(), b[2].get<double>(),
                                               b[3].get<double>()});
                    }
                    run.target = r.at("target").get<int>();
                    run.start = get_vec2(r.at("start"));
                    t.runs.push_back(std::move(run));
                }
                break;
            case TaskKind::Erase:
                for (const auto& line : j.at("polylines")) {
                    std::vector<Vec2> pts;
                    for (const auto& p : line) pts.push_back(get_vec2(p));
                    t.polylines.push_back(std::move(pts));
                }
                t.eraser_radius = j.at("eraser_radius").get<double>();
                t.start = get_vec2(j.at("start"));
                break;
            case TaskKind::HitMoving:
            case TaskKind::TrackMoving:
                for (const auto& tj : j.at("tracks")) {
                    Track tr;
                    tr.direction = enum_from<TrackDirection>(tj.at("direction").get<std::string>(),
                                                             {{"UD", TrackDirection::UD},
                                                              {"DU", TrackDirection::DU},
                                                              {"LR", TrackDirection::LR},
                                                              {"RL", TrackDirection::RL}},
                                                             1, "track direction");
                    tr.start = get_vec2(tj.at("start"));
                    tr.end = get_vec2(tj.at("end"));
                    tr.speed = tj.at("speed").get<double>();
                    tr.radius = tj.at("radius").get<double>();
                    t.tracks.push_back(tr);
                }
                break;
        }
    } catch (const json::exception& e) {
        parse_fail(1, std::string("task document: ") + e.what());
    }
    t.validate();
    return t;
}

// --- samples ---------------------------------------------------------------

std::string serialize_samples(const std::vector<HandSample>& samples) {
    std::string out = "# mpp-samples " + std::to_string(kFormatVersion) + "\n# t hand.x hand.y hand.z shoulder.x shoulder.y shoulder.z\n";
    for (const auto& s : samples) {
        const double fields[] = {s.t, s.hand.x, s.hand.y, s.hand.z, s.shoulder.x, s.shoulder.y, s.shoulder.z};
        for (std::size_t i = 0; i < 7; ++i) {
            if (i) out += ' ';
            out += format_exact(fields[i]);
        }
        out += '\n';
    }
    return out;
}

std::vector<HandSample> parse_samples(std::string_view text, std::vector<std::size_t>* lines) {
    std::vector<HandSample> out;
    if (lines) lines->clear();
    for_each_line(text, [&](std::size_t n, std::string_view raw) {
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#') return;
        const auto f = split_ws(line);
        if (f.size() != 7) parse_fail(n, "expected 7 numbers, got " + std::to_string(f.size()));
        double v[7];
        for (std::size_t i = 0; i < 7; ++i) {
            if (!parse_number(f[i], v[i])) parse_fail(n, "'" + std::string(f[i]) + "' is not a finite number");
        }
        out.push_back({v[0], {v[1], v[2], v[3]}, {v[4], v[5], v[6]}});
        if (lines) lines->push_back(n);
    });
    return out;
}

// --- logs ------------------------------------------------------------------

std::string serialize_log(const TrajectoryLog& log) {
    json h = header_for("mpp-log");
    h["task"] = to_string(log.task);
    h["technique"] = log.config.technique();
    h["config_hash"] = config_hash(log.config);
    h["config"] = serialize_config(log.config);
    std::string out = h.dump() + "\n";
    for (const auto& rec : log.records) {
        out += std::holds_alternative<FrameOutput>(rec) ? frame_line(std::get<FrameOutput>(rec))
                                                        : event_line(std::get<LogEvent>(rec));
        out += '\n';
    }
    return out;
}

TrajectoryLog parse_log(std::string_view text) {
    TrajectoryLog log;
    bool have_header = false;
    for_each_line(text, [&](std::size_t n, std::string_view raw) {
        const auto line = trim(raw);
        if (line.empty()) return;
        const json j = parse_json(line, n);
        if (!have_header) {
            check_header(j, "mpp-log");
            if (!j.contains("config") || !j.at("config").is_string()) parse_fail(n, "header lacks the config snapshot");
            log.config = parse_config(j.at("config").get<std::string>());
            if (j.value("config_hash", "") != config_hash(log.config)) parse_fail(n, "config_hash mismatch");
            log.task = enum_from<TaskKind>(j.value("task", ""), kTaskKinds, n, "task kind");
            have_header = true;
            return;
        }
        const std::string type = j.value("type", "");
        if (type == "frame") {
            log.records.emplace_back(frame_from(j, n));
        } else if (type == "event") {
            log.records.emplace_back(event_from(j, n));
        } else {
            parse_fail(n, "unknown record type '" + type + "'");
        }
    });
    if (!have_header) parse_fail(1, "empty log");
    log.validate();
    return log;
}

std::string serialize_frames(const TechniqueConfig& cfg, const std::vector<FrameOutput>& frames) {
    json h = header_for("mpp-frames");
    h["technique"] = cfg.technique();
    h["config_hash"] = config_hash(cfg);
    std::string out = h.dump() + "\n";
    for (const auto& f : frames) out += frame_line(f) + "\n";
    return out;
}

std::vector<FrameOutput> parse_frames(std::string_view text) {
    std::vector<FrameOutput> frames;
    bool have_header = false;
    for_each_line(text, [&](std::size_t n, std::string_view raw) {
        const auto line = trim(raw);
        if (line.empty()) return;
        const json j = parse_json(line, n);
        if (!have_header) {
            check_header(j, "mpp-frames");
            have_header = true;
            return;
        }
        if (j.value("type", "") != "frame") parse_fail(n, "expected a frame record");
        frames.push_back(frame_from(j, n));
    });
    if (!have_header) parse_fail(1, "empty frames file");
    return frames;
}

// --- results ---------------------------------------------------------------

std::string serialize_result(const TaskResult& r) {
    json j = header_for("mpp-result");
    j["metric"] = to_string(r.metric);
    j["unit"] = r.unit();
    j["complete"] = r.complete;
    j["aggregate"] = num_or_null(r.aggregate);
    json runs = json::array();
    for (double v : r.per_run) runs.push_back(num_or_null(v));
    j["per_run"] = runs;
    return j.dump(2) + "\n";
}

TaskResult parse_result(std::string_view text) {
    const json j = parse_json(text);
    check_header(j, "mpp-result");
    TaskResult r;
    try {
        r.metric = enum_from<Metric>(j.at("metric").get<std::string>(),
                                     {{"total_time", Metric::TotalTime},
                                      {"completion_time", Metric::CompletionTime},
                                      {"minimal_error", Metric::MinimalError},
                                      {"average_error", Metric::AverageError}},
                                     1, "metric");
        r.complete = j.at("complete").get<bool>();
        r.aggregate = get_num(j, "aggregate", 1);
        for (const auto& v : j.at("per_run")) r.per_run.push_back(v.is_null() ? kNaN : v.get<double>());
    } catch (const json::exception& e) {
        parse_fail(1, std::string("result document: ") + e.what());
    }
    return r;
}

// --- files -----------------------------------------------------------------

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::InvalidConfig, "cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error(ErrorCode::InvalidConfig, "short write to '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace mpp
