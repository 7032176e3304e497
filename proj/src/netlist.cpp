#include "circadj/netlist.hpp"

#include "circadj/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace circadj {

namespace {

struct Token {
    std::string text;
    int column = 0;  // 1-based
};

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool iequals(std::string_view a, std::string_view b) { return lower(a) == lower(b); }

/// Splits on whitespace, commas and parentheses.
std::vector<Token> tokenize(std::string_view line) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    auto is_sep = [](char c) {
        return std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == '(' || c == ')';
    };
    while (i < line.size()) {
        while (i < line.size() && is_sep(line[i])) ++i;
        if (i >= line.size()) break;
        std::size_t start = i;
        while (i < line.size() && !is_sep(line[i])) ++i;
        tokens.push_back({std::string(line.substr(start, i - start)), static_cast<int>(start) + 1});
    }
    return tokens;
}

std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

struct LineContext {
    int line;
    const std::vector<Token>& tokens;

    [[noreturn]] void fail(const std::string& msg, std::size_t token) const {
        int col = token < tokens.size() ? tokens[token].column : (tokens.empty() ? 1 : tokens.back().column);
        throw InputError(msg, line, col);
    }

    double number(std::size_t token, const char* what) const {
        if (token >= tokens.size()) fail(std::string("missing ") + what, token);
        auto v = parse_si_number(tokens[token].text);
        if (!v) fail(std::string("expected a number for ") + what + ", got '" + tokens[token].text + "'", token);
        return *v;
    }
};

ElementKind kind_from_letter(char c) {
    switch (std::toupper(static_cast<unsigned char>(c))) {
        case 'R': return ElementKind::Resistor;
        case 'L': return ElementKind::Inductor;
        case 'C': return ElementKind::Capacitor;
        case 'V': return ElementKind::VoltageSource;
        case 'I': return ElementKind::CurrentSource;
        case 'D': return ElementKind::Diode;
        case 'S': return ElementKind::Switch;
        default: throw std::invalid_argument("unknown element kind");
    }
}

Waveform parse_waveform(const LineContext& ctx, std::size_t first) {
    const auto& t = ctx.tokens;
    if (first >= t.size()) ctx.fail("missing source value", first);
    const std::string key = lower(t[first].text);
    if (key == "dc") {
        if (first + 2 != t.size()) ctx.fail("DC source takes exactly one value", first);
        return DcWave{ctx.number(first + 1, "DC level")};
    }
    if (key == "sin") {
        if (t.size() < first + 3 || t.size() > first + 4) ctx.fail("SIN takes (amplitude frequency [phase])", first);
        SineWave s;
        s.amplitude = ctx.number(first + 1, "amplitude");
        s.frequency = ctx.number(first + 2, "frequency");
        if (t.size() == first + 4) s.phase = ctx.number(first + 3, "phase");
        return s;
    }
    if (key == "pwm") {
        if (t.size() < first + 5 || t.size() > first + 8)
            ctx.fail("PWM takes (low high period duty [rise [fall [delay]]])", first);
        PwmWave p;
        p.low = ctx.number(first + 1, "low level");
        p.high = ctx.number(first + 2, "high level");
        p.period = ctx.number(first + 3, "period");
        p.duty = ctx.number(first + 4, "duty");
        if (t.size() > first + 5) p.rise = ctx.number(first + 5, "rise");
        if (t.size() > first + 6) p.fall = ctx.number(first + 6, "fall");
        if (t.size() > first + 7) p.delay = ctx.number(first + 7, "delay");
        return p;
    }
    if (first + 1 != t.size()) ctx.fail("unexpected tokens after source value", first + 1);
    return DcWave{ctx.number(first, "DC level")};
}

/// KEY=value arguments of diode and switch lines.
std::map<std::string, double> parse_keyvalues(const LineContext& ctx, std::size_t first,
                                              const std::set<std::string>& allowed) {
    std::map<std::string, double> out;
    for (std::size_t i = first; i < ctx.tokens.size(); ++i) {
        const auto& text = ctx.tokens[i].text;
        auto eq = text.find('=');
        if (eq == std::string::npos || eq == 0) ctx.fail("expected KEY=value, got '" + text + "'", i);
        std::string key = lower(text.substr(0, eq));
        if (!allowed.count(key)) ctx.fail("unknown model argument '" + text.substr(0, eq) + "'", i);
        auto v = parse_si_number(std::string_view(text).substr(eq + 1));
        if (!v) ctx.fail("bad number in '" + text + "'", i);
        if (out.count(key)) ctx.fail("duplicate model argument '" + key + "'", i);
        out[key] = *v;
    }
    return out;
}

struct ElementOrigin {
    int line = 0;
    int column = 1;
};

void validate_element(const Element& e, const ElementOrigin& at) {
    auto fail = [&](const std::string& m) { throw InputError(e.name + ": " + m, at.line, at.column); };
    if (e.nodes[0] == e.nodes[1]) fail("both terminals connect to node '" + e.nodes[0] + "'");
    if (e.is_passive() && !(e.value > 0.0)) fail("nonpositive value " + format_double(e.value));
    if (e.kind == ElementKind::VoltageSource || e.kind == ElementKind::CurrentSource) {
        try {
            validate(e.source);
        } catch (const InputError& err) {
            fail(err.what());
        }
    }
    if (e.kind == ElementKind::Diode) {
        if (!(e.diode.saturation_current > 0.0)) fail("diode IS must be > 0");
        if (!(e.diode.emission > 0.0)) fail("diode N must be > 0");
        if (!(e.diode.thermal_voltage > 0.0)) fail("diode VT must be > 0");
    }
    if (e.kind == ElementKind::Switch) {
        if (!(e.sw.r_on > 0.0)) fail("RON must be > 0");
        if (!(e.sw.r_off > 0.0)) fail("ROFF must be > 0");
        if (!(e.sw.r_off > e.sw.r_on)) fail("ROFF must exceed RON");
        try {
            validate(Waveform{e.sw.schedule});
        } catch (const InputError& err) {
            fail(err.what());
        }
    }
}

/// Shared by the parser and finalize(): node set, uniqueness, connectivity,
/// and parameter enumeration.
void resolve(Netlist& n, const std::vector<ElementOrigin>& origins) {
    auto origin = [&](std::size_t i) { return i < origins.size() ? origins[i] : ElementOrigin{}; };

    std::map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < n.elements.size(); ++i) {
        const auto& e = n.elements[i];
        auto key = lower(e.name);
        if (auto it = seen.find(key); it != seen.end())
            throw InputError("duplicate element name '" + e.name + "'", origin(i).line, origin(i).column);
        seen[key] = i;
        validate_element(e, origin(i));
    }

    n.nodes.assign(1, std::string(kGround));
    std::map<std::string, int> degree;
    std::map<std::string, std::size_t> first_user;
    bool touches_ground = false;
    for (std::size_t i = 0; i < n.elements.size(); ++i) {
        for (const auto& node : n.elements[i].nodes) {
            if (node == kGround) {
                touches_ground = true;
                continue;
            }
            if (!degree.count(node)) {
                n.nodes.push_back(node);
                first_user[node] = i;
            }
            ++degree[node];
        }
    }
    if (n.elements.empty()) throw InputError("netlist contains no elements");
    if (!touches_ground) throw InputError("no element is connected to ground node \"0\"");
    // A node reached by a single terminal is a dead end, unless that element
    // ties it straight to ground: then its voltage is still fixed by the element.
    for (const auto& [node, count] : degree) {
        if (count < 2) {
            auto i = first_user[node];
            const auto& nodes = n.elements[i].nodes;
            if (nodes[0] == kGround || nodes[1] == kGround) continue;
            throw InputError("dangling node '" + node + "' (only element " + n.elements[i].name + " touches it)",
                             origin(i).line, origin(i).column);
        }
    }

    n.params.clear();
    std::vector<std::size_t> chosen;
    if (n.param_filter.empty()) {
        for (std::size_t i = 0; i < n.elements.size(); ++i)
            if (n.elements[i].is_passive()) chosen.push_back(i);
    } else {
        std::set<std::size_t> uniq;
        for (const auto& name : n.param_filter) {
            auto it = seen.find(lower(name));
            if (it == seen.end()) throw InputError(".params references unknown element '" + name + "'");
            if (!n.elements[it->second].is_passive())
                throw InputError(".params element '" + name + "' is not an R, L or C");
            uniq.insert(it->second);
        }
        chosen.assign(uniq.begin(), uniq.end());
    }
    std::sort(chosen.begin(), chosen.end(),
              [&](std::size_t a, std::size_t b) { return n.elements[a].name < n.elements[b].name; });
    for (std::size_t id = 0; id < chosen.size(); ++id) {
        const auto& e = n.elements[chosen[id]];
        n.params.push_back({id, e.name, chosen[id], e.kind, e.value});
    }
}

}  // namespace

std::string_view to_string(ElementKind kind) {
    switch (kind) {
        case ElementKind::Resistor: return "R";
        case ElementKind::Inductor: return "L";
        case ElementKind::Capacitor: return "C";
        case ElementKind::VoltageSource: return "V";
        case ElementKind::CurrentSource: return "I";
        case ElementKind::Diode: return "D";
        case ElementKind::Switch: return "S";
    }
    return "?";
}

std::optional<double> parse_si_number(std::string_view token) {
    if (token.empty()) return std::nullopt;
    double value = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    if (*begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr == begin) return std::nullopt;
    std::string rest = lower(std::string_view(ptr, static_cast<std::size_t>(end - ptr)));
    if (rest.empty()) return value;
    double scale = 1.0;
    std::size_t used = 1;
    if (rest.rfind("meg", 0) == 0) {
        scale = 1e6;
        used = 3;
    } else {
        switch (rest[0]) {
            case 't': scale = 1e12; break;
            case 'g': scale = 1e9; break;
            case 'k': scale = 1e3; break;
            case 'm': scale = 1e-3; break;
            case 'u': scale = 1e-6; break;
            case 'n': scale = 1e-9; break;
            case 'p': scale = 1e-12; break;
            case 'f': scale = 1e-15; break;
            default: used = 0; break;
        }
    }
    // Anything after the scale suffix must be a plain unit name.
    for (std::size_t i = used; i < rest.size(); ++i)
        if (!std::isalpha(static_cast<unsigned char>(rest[i]))) return std::nullopt;
    return value * scale;
}

const Element* Netlist::find_element(std::string_view name) const {
    for (const auto& e : elements)
        if (iequals(e.name, name)) return &e;
    return nullptr;
}

std::size_t Netlist::element_index(std::string_view name) const {
    for (std::size_t i = 0; i < elements.size(); ++i)
        if (iequals(elements[i].name, name)) return i;
    throw InputError("unknown element '" + std::string(name) + "'");
}

const Parameter& Netlist::param(std::string_view name) const {
    for (const auto& p : params)
        if (iequals(p.name, name)) return p;
    throw InputError("unknown parameter '" + std::string(name) + "'");
}

Netlist parse_netlist(std::string_view text) {
    Netlist n;
    std::vector<ElementOrigin> origins;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        auto first = raw.find_first_not_of(" \t");
        if (first == std::string::npos || raw[first] == '*') continue;
        std::string_view line(raw);
        auto tokens = tokenize(line);
        LineContext ctx{line_no, tokens};
        const std::string head = lower(tokens[0].text);

        if (head[0] == '.') {
            if (head == ".end") break;
            if (head == ".title") {
                auto pos = raw.find_first_not_of(" \t", first + 6);
                n.title = pos == std::string::npos ? "" : raw.substr(pos);
                while (!n.title.empty() && std::isspace(static_cast<unsigned char>(n.title.back()))) n.title.pop_back();
            } else if (head == ".tran") {
                if (tokens.size() != 3) ctx.fail(".tran takes <dt> <t_end>", 0);
                TranDirective d{ctx.number(1, "dt"), ctx.number(2, "t_end")};
                if (!(d.dt > 0.0)) ctx.fail(".tran dt must be > 0", 1);
                if (!(d.t_end > 0.0)) ctx.fail(".tran t_end must be > 0", 2);
                n.tran = d;
            } else if (head == ".sens") {
                // The QoI selector contains parentheses, so re-split on whitespace only.
                std::istringstream ws(raw.substr(first));
                std::string directive, a, b, qoi, extra;
                ws >> directive >> a >> b;
                std::getline(ws, qoi);
                auto q0 = qoi.find_first_not_of(" \t");
                qoi = q0 == std::string::npos ? "" : qoi.substr(q0);
                while (!qoi.empty() && std::isspace(static_cast<unsigned char>(qoi.back()))) qoi.pop_back();
                auto ta = parse_si_number(a), tb = parse_si_number(b);
                if (!ta || !tb || qoi.empty()) ctx.fail(".sens takes <t_start> <t_end> <qoi>", 0);
                if (!(*tb >= *ta)) ctx.fail(".sens window end precedes its start", 2);
                n.sens = SensDirective{*ta, *tb, qoi};
            } else if (head == ".params") {
                if (tokens.size() < 2) ctx.fail(".params needs at least one element name", 0);
                for (std::size_t i = 1; i < tokens.size(); ++i) n.param_filter.push_back(tokens[i].text);
            } else {
                ctx.fail("unknown directive '" + tokens[0].text + "'", 0);
            }
            continue;
        }

        Element e;
        e.name = tokens[0].text;
        try {
            e.kind = kind_from_letter(e.name[0]);
        } catch (const std::invalid_argument&) {
            ctx.fail("unknown element kind '" + std::string(1, e.name[0]) + "'", 0);
        }
        if (tokens.size() < 3) ctx.fail("element needs two nodes", tokens.size());
        e.nodes = {tokens[1].text, tokens[2].text};
        switch (e.kind) {
            case ElementKind::Resistor:
            case ElementKind::Inductor:
            case ElementKind::Capacitor:
                if (tokens.size() != 4) ctx.fail("expected '<name> <node> <node> <value>'", tokens.size() < 4 ? 3 : 4);
                e.value = ctx.number(3, "value");
                if (!(e.value > 0.0)) ctx.fail("nonpositive value " + tokens[3].text, 3);
                break;
            case ElementKind::VoltageSource:
            case ElementKind::CurrentSource:
                e.source = parse_waveform(ctx, 3);
                break;
            case ElementKind::Diode: {
                auto kv = parse_keyvalues(ctx, 3, {"is", "n", "vt"});
                if (kv.count("is")) e.diode.saturation_current = kv["is"];
                if (kv.count("n")) e.diode.emission = kv["n"];
                if (kv.count("vt")) e.diode.thermal_voltage = kv["vt"];
                break;
            }
            case ElementKind::Switch: {
                auto kv = parse_keyvalues(ctx, 3, {"ron", "roff", "period", "duty", "delay", "ramp"});
                if (!kv.count("period") || !kv.count("duty")) ctx.fail("switch needs PERIOD= and DUTY=", 0);
                if (kv.count("ron")) e.sw.r_on = kv["ron"];
                if (kv.count("roff")) e.sw.r_off = kv["roff"];
                e.sw.schedule.period = kv["period"];
                e.sw.schedule.duty = kv["duty"];
                e.sw.schedule.delay = kv.count("delay") ? kv["delay"] : 0.0;
                double ramp = kv.count("ramp") ? kv["ramp"] : 10e-9;
                e.sw.schedule.rise = ramp;
                e.sw.schedule.fall = ramp;
                break;
            }
        }
        n.elements.push_back(std::move(e));
        origins.push_back({line_no, tokens[0].column});
    }
    resolve(n, origins);
    return n;
}

void finalize(Netlist& netlist) { resolve(netlist, {}); }

Netlist with_element_value(const Netlist& netlist, std::size_t element, double value) {
    Netlist copy = netlist;
    auto& e = copy.elements.at(element);
    if (!e.is_passive()) throw InputError(e.name + " is not an R, L or C element");
    e.value = value;
    finalize(copy);
    return copy;
}

std::string serialize(const Netlist& n) {
    std::ostringstream os;
    auto num = [](double v) { return format_double(v); };
    if (!n.title.empty()) os << ".title " << n.title << "\n";
    for (const auto& e : n.elements) {
        os << e.name << ' ' << e.nodes[0] << ' ' << e.nodes[1];
        switch (e.kind) {
            case ElementKind::Resistor:
            case ElementKind::Inductor:
            case ElementKind::Capacitor: os << ' ' << num(e.value); break;
            case ElementKind::VoltageSource:
            case ElementKind::CurrentSource:
                if (const auto* d = std::get_if<DcWave>(&e.source)) {
                    os << " DC " << num(d->level);
                } else if (const auto* s = std::get_if<SineWave>(&e.source)) {
                    os << " SIN(" << num(s->amplitude) << ' ' << num(s->frequency) << ' ' << num(s->phase) << ')';
                } else if (const auto* p = std::get_if<PwmWave>(&e.source)) {
                    os << " PWM(" << num(p->low) << ' ' << num(p->high) << ' ' << num(p->period) << ' '
                       << num(p->duty) << ' ' << num(p->rise) << ' ' << num(p->fall) << ' ' << num(p->delay) << ')';
                }
                break;
            case ElementKind::Diode:
                os << " IS=" << num(e.diode.saturation_current) << " N=" << num(e.diode.emission)
                   << " VT=" << num(e.diode.thermal_voltage);
                break;
            case ElementKind::Switch:
                // The schedule's rise and fall are both the ramp time.
                os << " RON=" << num(e.sw.r_on) << " ROFF=" << num(e.sw.r_off) << " PERIOD=" << num(e.sw.schedule.period)
                   << " DUTY=" << num(e.sw.schedule.duty) << " DELAY=" << num(e.sw.schedule.delay)
                   << " RAMP=" << num(e.sw.schedule.rise);
                break;
        }
        os << "\n";
    }
    if (!n.param_filter.empty()) {
        os << ".params";
        for (const auto& p : n.param_filter) os << ' ' << p;
        os << "\n";
    }
    if (n.tran) os << ".tran " << num(n.tran->dt) << ' ' << num(n.tran->t_end) << "\n";
    if (n.sens) os << ".sens " << num(n.sens->t_start) << ' ' << num(n.sens->t_end) << ' ' << n.sens->qoi << "\n";
    os << ".end\n";
    return os.str();
}

Netlist load_netlist(const std::string& path_or_builtin) {
    constexpr std::string_view prefix = "builtin:";
    if (path_or_builtin.rfind(prefix, 0) == 0) {
        std::string rest = path_or_builtin.substr(prefix.size());
        BuiltinOptions opt;
        if (auto colon = rest.find(':'); colon != std::string::npos) {
            try {
                opt.ladder_stages = std::stoi(rest.substr(colon + 1));
            } catch (const std::exception&) {
                throw InputError("bad builtin stage count in '" + path_or_builtin + "'");
            }
            rest = rest.substr(0, colon);
        }
        return builtin_circuit(rest, opt);
    }
    std::ifstream f(path_or_builtin);
    if (!f) throw InputError("cannot read netlist file '" + path_or_builtin + "'");
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_netlist(buf.str());
}

}  // namespace circadj
