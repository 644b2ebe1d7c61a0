#include "delaystab/spec_io.hpp"

#include "delaystab/equilibrium.hpp"
#include "delaystab/errors.hpp"
#include "delaystab/expression.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace delaystab {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------------------
// Field paths: dotted keys with 1-based indices, e.g. "dynamics.g[1][2]".

using PathPart = std::variant<std::string, std::size_t>;

struct Path {
    std::vector<PathPart> parts;

    Path key(const std::string& k) const {
        Path p = *this;
        p.parts.emplace_back(k);
        return p;
    }
    Path at(std::size_t i) const {
        Path p = *this;
        p.parts.emplace_back(i);
        return p;
    }
    std::string str() const {
        std::string s;
        for (const auto& part : parts) {
            if (const auto* k = std::get_if<std::string>(&part)) {
                if (!s.empty()) s += '.';
                s += *k;
            } else {
                s += '[' + std::to_string(std::get<std::size_t>(part) + 1) + ']';
            }
        }
        return s.empty() ? "<root>" : s;
    }

    nlohmann::json::json_pointer pointer() const {
        nlohmann::json::json_pointer ptr;
        for (const auto& part : parts) {
            if (const auto* k = std::get_if<std::string>(&part))
                ptr /= *k;
            else
                ptr /= std::get<std::size_t>(part);
        }
        return ptr;
    }

    static Path parse(std::string_view text) {
        Path p;
        std::size_t i = 0;
        while (i < text.size()) {
            if (text[i] == '.') {
                ++i;
            } else if (text[i] == '[') {
                const std::size_t close = text.find(']', i);
                if (close == std::string_view::npos) break;
                const std::size_t one_based = std::stoul(std::string(text.substr(i + 1, close - i - 1)));
                p.parts.emplace_back(one_based == 0 ? 0 : one_based - 1);
                i = close + 1;
            } else {
                const std::size_t end = text.find_first_of(".[", i);
                p.parts.emplace_back(std::string(text.substr(i, end - i)));
                i = end == std::string_view::npos ? text.size() : end;
            }
        }
        return p;
    }
};

// Finds the line of the value at `target` in JSON text, or of its deepest existing
// ancestor. Assumes the text already parsed successfully.
class Locator {
public:
    Locator(std::string_view text, const Path& target) : s_(text), target_(target) {}

    int line() {
        std::vector<PathPart> here;
        value(here);
        return best_line_;
    }

private:
    void ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) {
            if (s_[pos_] == '\n') ++line_;
            ++pos_;
        }
    }

    std::string string_token() {
        std::string out;
        ++pos_;  // opening quote
        while (pos_ < s_.size() && s_[pos_] != '"') {
            if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
            out += s_[pos_++];
        }
        ++pos_;
        return out;
    }

    void note(const std::vector<PathPart>& here) {
        if (here.size() < best_depth_ || here.size() > target_.parts.size()) return;
        if (!std::equal(here.begin(), here.end(), target_.parts.begin())) return;
        best_depth_ = here.size();
        best_line_ = line_;
    }

    void value(std::vector<PathPart>& here) {
        ws();
        if (pos_ >= s_.size()) return;
        note(here);
        const char c = s_[pos_];
        if (c == '{') {
            ++pos_;
            for (;;) {
                ws();
                if (pos_ >= s_.size() || s_[pos_] == '}') break;
                if (s_[pos_] == ',') {
                    ++pos_;
                    continue;
                }
                const std::string k = string_token();
                ws();
                ++pos_;  // colon
                here.emplace_back(k);
                value(here);
                here.pop_back();
            }
            ++pos_;
        } else if (c == '[') {
            ++pos_;
            std::size_t i = 0;
            for (;;) {
                ws();
                if (pos_ >= s_.size() || s_[pos_] == ']') break;
                if (s_[pos_] == ',') {
                    ++pos_;
                    continue;
                }
                here.emplace_back(i++);
                value(here);
                here.pop_back();
            }
            ++pos_;
        } else if (c == '"') {
            string_token();
        } else {
            while (pos_ < s_.size() && !std::strchr(",]} \t\r\n", s_[pos_])) ++pos_;
        }
    }

    std::string_view s_;
    const Path& target_;
    std::size_t pos_ = 0;
    int line_ = 1;
    std::size_t best_depth_ = 0;
    int best_line_ = 1;
};

// ---------------------------------------------------------------------------------------

class Reader {
public:
    Reader(std::string_view text, std::string_view origin) : text_(text), origin_(origin) {}

    [[noreturn]] void fail(const Path& path, const std::string& message) const {
        throw InputError(where(path) + message);
    }

    std::string where(const Path& path) const {
        return std::string(origin_) + ":" + std::to_string(Locator(text_, path).line()) + ": " + path.str() + ": ";
    }

    std::map<std::string, double> params;

    void only_keys(const json& obj, const Path& path, std::initializer_list<const char*> allowed) const {
        for (const auto& [k, v] : obj.items()) {
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
                fail(path.key(k), "unknown field");
        }
    }

    const json& object(const json& j, const Path& path) const {
        if (!j.is_object()) fail(path, "expected an object");
        return j;
    }

    const json& field(const json& obj, const Path& path, const char* key) const {
        auto it = obj.find(key);
        if (it == obj.end()) fail(path.key(key), "missing required field");
        return *it;
    }

    double number(const json& j, const Path& path) const {
        double v = 0.0;
        if (j.is_number()) {
            v = j.get<double>();
        } else if (j.is_string()) {
            try {
                v = evaluate_expression(j.get<std::string>(), params);
            } catch (const InputError& e) {
                fail(path, e.what());
            }
        } else {
            fail(path, "expected a number or an expression string");
        }
        if (!std::isfinite(v)) fail(path, "value is not finite");
        return v;
    }

    double number_field(const json& obj, const Path& path, const char* key) const {
        return number(field(obj, path, key), path.key(key));
    }

    double number_or(const json& obj, const Path& path, const char* key, double fallback) const {
        auto it = obj.find(key);
        return it == obj.end() ? fallback : number(*it, path.key(key));
    }

    std::size_t count(const json& obj, const Path& path, const char* key) const {
        const double v = number_field(obj, path, key);
        if (v < 1.0 || v != std::floor(v) || v > 1e6) fail(path.key(key), "expected a positive integer");
        return static_cast<std::size_t>(v);
    }

    // A scalar is broadcast to every entry.
    Vector vector(const json& j, const Path& path, std::size_t n) const {
        if (!j.is_array()) return Vector(n, number(j, path));
        if (j.size() != n) fail(path, "expected " + std::to_string(n) + " entries, got " + std::to_string(j.size()));
        Vector v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = number(j[i], path.at(i));
        return v;
    }

    Matrix matrix(const json& j, const Path& path, std::size_t n) const {
        if (!j.is_array()) return Matrix(n, number(j, path));
        if (j.size() != n) fail(path, "expected " + std::to_string(n) + " rows, got " + std::to_string(j.size()));
        Matrix m(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Vector row = vector(j[i], path.at(i), n);
            for (std::size_t k = 0; k < n; ++k) m(i, k) = row[k];
        }
        return m;
    }

    bool boolean_or(const json& obj, const Path& path, const char* key, bool fallback) const {
        auto it = obj.find(key);
        if (it == obj.end()) return fallback;
        if (!it->is_boolean()) fail(path.key(key), "expected true or false");
        return it->get<bool>();
    }

    std::string type_of(const json& j, const Path& path) const {
        const auto& t = field(j, path, "type");
        if (!t.is_string()) fail(path.key("type"), "expected a string");
        return t.get<std::string>();
    }

    TimeFunction time_function(const json& j, const Path& path) const {
        if (!j.is_object()) return TimeFunction::constant(number(j, path));
        const std::string type = type_of(j, path);
        if (type == "constant") {
            only_keys(j, path, {"type", "value"});
            return TimeFunction::constant(number_field(j, path, "value"));
        }
        if (type == "sinusoid") {
            only_keys(j, path, {"type", "offset", "amplitude", "omega", "phase"});
            return TimeFunction::sinusoid(number_field(j, path, "offset"), number_field(j, path, "amplitude"),
                                          number_or(j, path, "omega", 1.0), number_or(j, path, "phase", 0.0));
        }
        fail(path.key("type"), "unknown coefficient type '" + type + "' (constant, sinusoid)");
    }

    DelayFunction delay(const json& j, const Path& path) const {
        if (!j.is_object()) {
            const double lag = number(j, path);
            return lag == 0.0 ? DelayFunction::none() : DelayFunction::constant(lag);
        }
        const std::string type = type_of(j, path);
        if (type == "none") {
            only_keys(j, path, {"type"});
            return DelayFunction::none();
        }
        if (type == "constant") {
            only_keys(j, path, {"type", "value"});
            return DelayFunction::constant(number_field(j, path, "value"));
        }
        if (type == "abs_sin") {
            only_keys(j, path, {"type", "offset", "amplitude", "omega", "phase"});
            return DelayFunction::abs_sin(number_field(j, path, "offset"), number_field(j, path, "amplitude"),
                                          number_or(j, path, "omega", 1.0), number_or(j, path, "phase", 0.0));
        }
        if (type == "sin_squared") {
            only_keys(j, path, {"type", "amplitude", "omega", "phase"});
            return DelayFunction::sin_squared(number_field(j, path, "amplitude"), number_or(j, path, "omega", 1.0),
                                              number_or(j, path, "phase", 0.0));
        }
        fail(path.key("type"), "unknown delay type '" + type + "' (none, constant, abs_sin, sin_squared)");
    }

    Activation activation(const json& j, const Path& path) const {
        if (!j.is_object()) return Activation::linear(number(j, path));
        const std::string type = type_of(j, path);
        only_keys(j, path, {"type", "k"});
        const double k = number_field(j, path, "k");
        if (type == "linear") return Activation::linear(k);
        if (type == "tanh_scaled") return Activation::tanh_scaled(k);
        if (type == "sin_scaled") return Activation::sin_scaled(k);
        if (type == "logistic_centered") return Activation::logistic_centered(k);
        fail(path.key("type"),
             "unknown activation type '" + type + "' (linear, tanh_scaled, sin_scaled, logistic_centered)");
    }

    template <class T, class Fn>
    std::vector<T> list(const json& j, const Path& path, std::size_t n, Fn&& one) const {
        if (!j.is_array()) return std::vector<T>(n, one(j, path));
        if (j.size() != n) fail(path, "expected " + std::to_string(n) + " entries, got " + std::to_string(j.size()));
        std::vector<T> out;
        for (std::size_t i = 0; i < n; ++i) out.push_back(one(j[i], path.at(i)));
        return out;
    }

    template <class T, class Fn>
    std::vector<std::vector<T>> grid(const json& j, const Path& path, std::size_t n, Fn&& one) const {
        if (!j.is_array()) return std::vector<std::vector<T>>(n, std::vector<T>(n, one(j, path)));
        if (j.size() != n) fail(path, "expected " + std::to_string(n) + " rows, got " + std::to_string(j.size()));
        std::vector<std::vector<T>> out;
        for (std::size_t i = 0; i < n; ++i) out.push_back(list<T>(j[i], path.at(i), n, one));
        return out;
    }

    auto tf() const {
        return [this](const json& j, const Path& p) { return time_function(j, p); };
    }
    auto dl() const {
        return [this](const json& j, const Path& p) { return delay(j, p); };
    }
    auto act() const {
        return [this](const json& j, const Path& p) { return activation(j, p); };
    }

    void check(const std::vector<Violation>& violations) const {
        if (violations.empty()) return;
        std::string msg;
        for (const auto& v : violations) {
            if (!msg.empty()) msg += '\n';
            msg += std::string(origin_) + ":" + std::to_string(Locator(text_, Path::parse(v.path)).line()) + ": " +
                   v.message;
        }
        throw InputError(msg);
    }

private:
    std::string_view text_;
    std::string_view origin_;
};

const Path kRoot{};

GeneralSystemSpec read_general(const Reader& r, const json& j) {
    GeneralSystemSpec s;
    s.m = r.count(j, kRoot, "m");
    s.alpha = r.vector(r.field(j, kRoot, "alpha"), kRoot.key("alpha"), s.m);
    s.A = j.contains("A") ? r.vector(j["A"], kRoot.key("A"), s.m) : s.alpha;
    s.diagonal_delay_free = r.boolean_or(j, kRoot, "diagonal_delay_free", false);
    s.tau = j.contains("tau") ? r.vector(j["tau"], kRoot.key("tau"), s.m) : Vector(s.m, 0.0);
    s.sigma = j.contains("sigma") ? r.matrix(j["sigma"], kRoot.key("sigma"), s.m) : Matrix(s.m);
    s.L = r.matrix(r.field(j, kRoot, "L"), kRoot.key("L"), s.m);
    return s;
}

LinearSystemSpec read_linear(const Reader& r, const json& j) {
    LinearSystemSpec s;
    s.m = r.count(j, kRoot, "m");
    s.alpha = r.vector(r.field(j, kRoot, "alpha"), kRoot.key("alpha"), s.m);
    s.A = j.contains("A") ? r.vector(j["A"], kRoot.key("A"), s.m) : s.alpha;
    s.A_off = r.matrix(r.field(j, kRoot, "A_off"), kRoot.key("A_off"), s.m);
    s.sigma = j.contains("sigma") ? r.matrix(j["sigma"], kRoot.key("sigma"), s.m) : Matrix(s.m);
    s.diagonal_delay_free = r.boolean_or(j, kRoot, "diagonal_delay_free", false);
    return s;
}

BamSpec read_bam(const Reader& r, const json& j) {
    BamSpec s;
    s.n = r.count(j, kRoot, "n");
    auto vec = [&](const char* key) { return r.vector(r.field(j, kRoot, key), kRoot.key(key), s.n); };
    auto vec_or = [&](const char* key, double fallback) {
        return j.contains(key) ? r.vector(j[key], kRoot.key(key), s.n) : Vector(s.n, fallback);
    };
    s.a = vec("a");
    s.b = vec("b");
    s.a_conn = r.matrix(r.field(j, kRoot, "a_conn"), kRoot.key("a_conn"), s.n);
    s.b_conn = r.matrix(r.field(j, kRoot, "b_conn"), kRoot.key("b_conn"), s.n);
    s.Lf = vec("Lf");
    s.Lg = vec("Lg");
    s.r_lo = vec_or("r_lo", 1.0);
    s.r_hi = j.contains("r_hi") ? vec("r_hi") : s.r_lo;
    s.p_lo = vec_or("p_lo", 1.0);
    s.p_hi = j.contains("p_hi") ? vec("p_hi") : s.p_lo;
    s.tau1 = vec_or("tau1", 0.0);
    s.tau2 = vec_or("tau2", 0.0);
    s.sig1 = vec_or("sig1", 0.0);
    s.sig2 = vec_or("sig2", 0.0);
    s.I = vec_or("I", 0.0);
    s.J = vec_or("J", 0.0);
    return s;
}

TwoNeuronParams read_two_neuron(const Reader& r, const json& j) {
    TwoNeuronParams p;
    p.a1 = r.number_field(j, kRoot, "a1");
    p.a2 = r.number_field(j, kRoot, "a2");
    p.a12 = r.number_field(j, kRoot, "a12");
    p.a21 = r.number_field(j, kRoot, "a21");
    p.tau1 = r.number_or(j, kRoot, "tau1", 0.0);
    p.tau2 = r.number_or(j, kRoot, "tau2", 0.0);
    p.sigma1 = r.number_or(j, kRoot, "sigma1", 0.0);
    p.sigma2 = r.number_or(j, kRoot, "sigma2", 0.0);
    p.L1 = r.number_field(j, kRoot, "L1");
    p.L2 = r.number_field(j, kRoot, "L2");
    return p;
}

const Path kDyn = Path{}.key("dynamics");

GeneralDynamics read_dynamics(const Reader& r, const json& d, const GeneralSystemSpec& s) {
    GeneralDynamics out = default_dynamics(s);
    r.only_keys(d, kDyn, {"a", "h", "g", "F"});
    if (d.contains("a")) out.a = r.list<TimeFunction>(d["a"], kDyn.key("a"), s.m, r.tf());
    if (d.contains("h")) out.h = r.list<DelayFunction>(d["h"], kDyn.key("h"), s.m, r.dl());
    if (d.contains("g")) out.g = r.grid<DelayFunction>(d["g"], kDyn.key("g"), s.m, r.dl());
    if (d.contains("F")) out.F = r.grid<Activation>(d["F"], kDyn.key("F"), s.m, r.act());
    return out;
}

LinearDynamics read_dynamics(const Reader& r, const json& d, const LinearSystemSpec& s) {
    LinearDynamics out = default_dynamics(s);
    r.only_keys(d, kDyn, {"diag", "off", "g"});
    if (d.contains("diag")) out.diag = r.list<TimeFunction>(d["diag"], kDyn.key("diag"), s.m, r.tf());
    if (d.contains("off")) out.off = r.grid<TimeFunction>(d["off"], kDyn.key("off"), s.m, r.tf());
    if (d.contains("g")) out.g = r.grid<DelayFunction>(d["g"], kDyn.key("g"), s.m, r.dl());
    return out;
}

BamDynamics read_dynamics(const Reader& r, const json& d, const BamSpec& s) {
    BamDynamics out = default_dynamics(s);
    r.only_keys(d, kDyn, {"r", "p", "h1", "h2", "l1", "l2", "f", "g"});
    if (d.contains("r")) out.r = r.list<TimeFunction>(d["r"], kDyn.key("r"), s.n, r.tf());
    if (d.contains("p")) out.p = r.list<TimeFunction>(d["p"], kDyn.key("p"), s.n, r.tf());
    if (d.contains("h1")) out.h1 = r.list<DelayFunction>(d["h1"], kDyn.key("h1"), s.n, r.dl());
    if (d.contains("h2")) out.h2 = r.list<DelayFunction>(d["h2"], kDyn.key("h2"), s.n, r.dl());
    if (d.contains("l1")) out.l1 = r.list<DelayFunction>(d["l1"], kDyn.key("l1"), s.n, r.dl());
    if (d.contains("l2")) out.l2 = r.list<DelayFunction>(d["l2"], kDyn.key("l2"), s.n, r.dl());
    if (d.contains("f")) out.f = r.list<Activation>(d["f"], kDyn.key("f"), s.n, r.act());
    if (d.contains("g")) out.g = r.list<Activation>(d["g"], kDyn.key("g"), s.n, r.act());
    return out;
}

TwoNeuronDynamics read_dynamics(const Reader& r, const json& d, const TwoNeuronParams& p) {
    TwoNeuronDynamics out{Activation::linear(p.L1), Activation::linear(p.L2)};
    r.only_keys(d, kDyn, {"f1", "f2"});
    if (d.contains("f1")) out.f1 = r.activation(d["f1"], kDyn.key("f1"));
    if (d.contains("f2")) out.f2 = r.activation(d["f2"], kDyn.key("f2"));
    return out;
}

std::vector<Violation> validate_two_neuron(const TwoNeuronParams& p, const TwoNeuronDynamics& d) {
    std::vector<Violation> out = validate(p);
    auto lip = [&](const char* path, const Activation& a, double bound) {
        if (a.lipschitz() > bound * (1.0 + 1e-12))
            out.push_back({path, std::string(path) + " Lipschitz constant exceeds " + std::to_string(bound),
                           a.lipschitz()});
    };
    lip("dynamics.f1", d.f1, p.L1);
    lip("dynamics.f2", d.f2, p.L2);
    return out;
}

// ---------------------------------------------------------------------------------------
// Writers

json write(const TimeFunction& f) {
    if (f.kind == TimeFunction::Kind::constant) return {{"type", "constant"}, {"value", f.offset}};
    return {{"type", "sinusoid"}, {"offset", f.offset}, {"amplitude", f.amplitude}, {"omega", f.omega},
            {"phase", f.phase}};
}

json write(const DelayFunction& d) {
    switch (d.kind) {
        case DelayFunction::Kind::none: return {{"type", "none"}};
        case DelayFunction::Kind::constant: return {{"type", "constant"}, {"value", d.offset}};
        case DelayFunction::Kind::abs_sin:
            return {{"type", "abs_sin"}, {"offset", d.offset}, {"amplitude", d.amplitude}, {"omega", d.omega},
                    {"phase", d.phase}};
        case DelayFunction::Kind::sin_squared:
            return {{"type", "sin_squared"}, {"amplitude", d.amplitude}, {"omega", d.omega}, {"phase", d.phase}};
    }
    return {};
}

json write(const Activation& a) {
    if (a.kind == Activation::Kind::custom) throw InputError("custom activations cannot be serialized");
    return {{"type", std::string(to_string(a.kind))}, {"k", a.k}};
}

json write(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.size(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

template <class T>
json write_list(const std::vector<T>& v) {
    json out = json::array();
    for (const auto& x : v) out.push_back(write(x));
    return out;
}

template <class T>
json write_grid(const std::vector<std::vector<T>>& g) {
    json out = json::array();
    for (const auto& row : g) out.push_back(write_list(row));
    return out;
}

void write_spec(json& j, const GeneralSystemSpec& s) {
    j["m"] = s.m;
    j["alpha"] = s.alpha;
    j["A"] = s.A;
    j["tau"] = s.tau;
    j["sigma"] = write(s.sigma);
    j["L"] = write(s.L);
    j["diagonal_delay_free"] = s.diagonal_delay_free;
}

void write_spec(json& j, const LinearSystemSpec& s) {
    j["m"] = s.m;
    j["alpha"] = s.alpha;
    j["A"] = s.A;
    j["A_off"] = write(s.A_off);
    j["sigma"] = write(s.sigma);
    j["diagonal_delay_free"] = s.diagonal_delay_free;
}

void write_spec(json& j, const BamSpec& s) {
    j["n"] = s.n;
    j["a"] = s.a;
    j["b"] = s.b;
    j["a_conn"] = write(s.a_conn);
    j["b_conn"] = write(s.b_conn);
    j["Lf"] = s.Lf;
    j["Lg"] = s.Lg;
    j["r_lo"] = s.r_lo;
    j["r_hi"] = s.r_hi;
    j["p_lo"] = s.p_lo;
    j["p_hi"] = s.p_hi;
    j["tau1"] = s.tau1;
    j["tau2"] = s.tau2;
    j["sig1"] = s.sig1;
    j["sig2"] = s.sig2;
    j["I"] = s.I;
    j["J"] = s.J;
}

void write_spec(json& j, const TwoNeuronParams& p) {
    j["a1"] = p.a1;
    j["a2"] = p.a2;
    j["a12"] = p.a12;
    j["a21"] = p.a21;
    j["tau1"] = p.tau1;
    j["tau2"] = p.tau2;
    j["sigma1"] = p.sigma1;
    j["sigma2"] = p.sigma2;
    j["L1"] = p.L1;
    j["L2"] = p.L2;
}

json write_dynamics(const GeneralDynamics& d) {
    return {{"a", write_list(d.a)}, {"h", write_list(d.h)}, {"g", write_grid(d.g)}, {"F", write_grid(d.F)}};
}

json write_dynamics(const LinearDynamics& d) {
    return {{"diag", write_list(d.diag)}, {"off", write_grid(d.off)}, {"g", write_grid(d.g)}};
}

json write_dynamics(const BamDynamics& d) {
    return {{"r", write_list(d.r)},   {"p", write_list(d.p)},   {"h1", write_list(d.h1)}, {"h2", write_list(d.h2)},
            {"l1", write_list(d.l1)}, {"l2", write_list(d.l2)}, {"f", write_list(d.f)},   {"g", write_list(d.g)}};
}

json write_dynamics(const TwoNeuronDynamics& d) { return {{"f1", write(d.f1)}, {"f2", write(d.f2)}}; }

}  // namespace

std::string_view to_string(SystemKind k) {
    switch (k) {
        case SystemKind::general: return "general";
        case SystemKind::linear: return "linear";
        case SystemKind::bam: return "bam";
        case SystemKind::two_neuron: return "two_neuron";
    }
    return "?";
}

std::size_t SystemDocument::dimension() const {
    return std::visit(
        [](const auto& s) -> std::size_t {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, BamSpec>) return 2 * s.n;
            else if constexpr (std::is_same_v<T, TwoNeuronParams>) return 2;
            else return s.m;
        },
        spec);
}

SystemDocument parse_document(std::string_view text, std::string_view origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // byte offset → line
        const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        throw InputError(std::string(origin) + ":" + std::to_string(line) + ": malformed JSON: " + e.what());
    }

    Reader r(text, origin);
    r.object(j, kRoot);
    SystemDocument doc;

    if (auto it = j.find("parameters"); it != j.end()) {
        const Path base = kRoot.key("parameters");
        r.object(*it, base);
        for (const auto& [k, v] : it->items()) doc.parameters[k] = r.number(v, base.key(k));
        r.params = doc.parameters;
    }

    const json& kind = r.field(j, kRoot, "kind");
    const std::string k = kind.is_string() ? kind.get<std::string>() : "";
    const json empty = json::object();
    const json& dyn = j.contains("dynamics") ? r.object(j["dynamics"], kDyn) : empty;

    if (k == "general") {
        r.only_keys(j, kRoot, {"kind", "parameters", "m", "alpha", "A", "tau", "sigma", "L", "diagonal_delay_free",
                               "dynamics", "simulation"});
        doc.kind = SystemKind::general;
        auto s = read_general(r, j);
        r.check(validate(s));
        auto d = read_dynamics(r, dyn, s);
        r.check(validate(s, d));
        doc.spec = s;
        doc.dynamics = d;
    } else if (k == "linear") {
        r.only_keys(j, kRoot, {"kind", "parameters", "m", "alpha", "A", "A_off", "sigma", "diagonal_delay_free",
                               "dynamics", "simulation"});
        doc.kind = SystemKind::linear;
        auto s = read_linear(r, j);
        r.check(validate(s));
        auto d = read_dynamics(r, dyn, s);
        r.check(validate(s, d));
        doc.spec = s;
        doc.dynamics = d;
    } else if (k == "bam") {
        r.only_keys(j, kRoot, {"kind", "parameters", "n", "a", "b", "a_conn", "b_conn", "Lf", "Lg", "r_lo", "r_hi",
                               "p_lo", "p_hi", "tau1", "tau2", "sig1", "sig2", "I", "J", "dynamics", "simulation"});
        doc.kind = SystemKind::bam;
        auto s = read_bam(r, j);
        r.check(validate(s));
        auto d = read_dynamics(r, dyn, s);
        r.check(validate(s, d));
        doc.spec = s;
        doc.dynamics = d;
    } else if (k == "two_neuron") {
        r.only_keys(j, kRoot, {"kind", "parameters", "a1", "a2", "a12", "a21", "tau1", "tau2", "sigma1", "sigma2",
                               "L1", "L2", "dynamics", "simulation"});
        doc.kind = SystemKind::two_neuron;
        auto p = read_two_neuron(r, j);
        r.check(validate(p));
        auto d = read_dynamics(r, dyn, p);
        r.check(validate_two_neuron(p, d));
        doc.spec = p;
        doc.dynamics = d;
    } else {
        r.fail(kRoot.key("kind"), "expected one of general, linear, bam, two_neuron");
    }

    if (auto it = j.find("simulation"); it != j.end()) {
        const Path base = kRoot.key("simulation");
        r.object(*it, base);
        r.only_keys(*it, base, {"history", "t_end", "step", "record_every"});
        if (it->contains("history"))
            doc.simulation.history =
                r.list<TimeFunction>((*it)["history"], base.key("history"), doc.dimension(), r.tf());
        if (it->contains("t_end")) {
            doc.simulation.t_end = r.number_field(*it, base, "t_end");
            if (!(*doc.simulation.t_end > 0.0)) r.fail(base.key("t_end"), "must be > 0");
        }
        if (it->contains("step")) {
            doc.simulation.step = r.number_field(*it, base, "step");
            if (!(*doc.simulation.step > 0.0)) r.fail(base.key("step"), "must be > 0");
        }
        if (it->contains("record_every"))
            doc.simulation.record_every = static_cast<int>(r.count(*it, base, "record_every"));
    }
    return doc;
}

SystemDocument load_document(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw InputError(file.string() + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_document(buf.str(), file.string());
}

json to_json(const SystemDocument& doc) {
    json j;
    j["kind"] = std::string(to_string(doc.kind));
    if (!doc.parameters.empty()) j["parameters"] = doc.parameters;
    std::visit([&](const auto& s) { write_spec(j, s); }, doc.spec);
    j["dynamics"] = std::visit([](const auto& d) { return write_dynamics(d); }, doc.dynamics);
    json sim = json::object();
    if (!doc.simulation.history.empty()) sim["history"] = write_list(doc.simulation.history);
    if (doc.simulation.t_end) sim["t_end"] = *doc.simulation.t_end;
    if (doc.simulation.step) sim["step"] = *doc.simulation.step;
    if (doc.simulation.record_every) sim["record_every"] = *doc.simulation.record_every;
    if (!sim.empty()) j["simulation"] = sim;
    return j;
}

std::string serialize(const SystemDocument& doc) { return to_json(doc).dump(2) + "\n"; }

std::string patch_number(std::string_view text, std::string_view path, double value) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("malformed JSON: ") + e.what());
    }
    if (path.empty()) throw InputError("empty parameter path");
    json::json_pointer ptr;
    try {
        ptr = path.front() == '/' ? json::json_pointer(std::string(path)) : Path::parse(path).pointer();
    } catch (const std::exception& e) {
        throw InputError("malformed parameter path '" + std::string(path) + "'");
    }
    // The path must name an existing scalar: a sweep never invents fields.
    if (!j.contains(ptr)) throw InputError("parameter path '" + std::string(path) + "' does not exist in the file");
    json& target = j.at(ptr);
    if (!target.is_number() && !target.is_string())
        throw InputError("parameter path '" + std::string(path) + "' does not address a single number");
    target = value;
    return j.dump(2);
}

BamSpec as_bam(const SystemDocument& doc) {
    if (const auto* b = std::get_if<BamSpec>(&doc.spec)) return *b;
    if (const auto* p = std::get_if<TwoNeuronParams>(&doc.spec)) return two_neuron_spec(*p);
    throw InputError("system kind '" + std::string(to_string(doc.kind)) + "' is not a network");
}

BamDynamics as_bam_dynamics(const SystemDocument& doc) {
    if (const auto* d = std::get_if<BamDynamics>(&doc.dynamics)) return *d;
    if (const auto* d = std::get_if<TwoNeuronDynamics>(&doc.dynamics))
        return two_neuron_dynamics(std::get<TwoNeuronParams>(doc.spec), d->f1, d->f2);
    throw InputError("system kind '" + std::string(to_string(doc.kind)) + "' is not a network");
}

ConcreteSystem concrete_system(const SystemDocument& doc) {
    switch (doc.kind) {
        case SystemKind::general:
            return make_concrete(std::get<GeneralSystemSpec>(doc.spec), std::get<GeneralDynamics>(doc.dynamics));
        case SystemKind::linear:
            return make_concrete(std::get<LinearSystemSpec>(doc.spec), std::get<LinearDynamics>(doc.dynamics));
        case SystemKind::bam:
        case SystemKind::two_neuron: return make_concrete(as_bam(doc), as_bam_dynamics(doc));
    }
    throw InputError("unknown system kind");
}

Vector reference_state(const SystemDocument& doc) {
    if (doc.kind == SystemKind::general || doc.kind == SystemKind::linear) return Vector(doc.dimension(), 0.0);
    const BamDynamics d = as_bam_dynamics(doc);
    const Equilibrium eq = solve_equilibrium(as_bam(doc), d.f, d.g);
    Vector ref = eq.x_star;
    ref.insert(ref.end(), eq.y_star.begin(), eq.y_star.end());
    return ref;
}

SimConfig simulation_config(const SystemDocument& doc, std::optional<double> t_end, std::optional<double> step) {
    SimConfig cfg;
    cfg.t_end = t_end.value_or(doc.simulation.t_end.value_or(20.0));
    if (step) {
        cfg.h = *step;
    } else if (doc.simulation.step) {
        cfg.h = *doc.simulation.step;
    } else {
        const double shortest = concrete_system(doc).min_positive_delay_bound();
        cfg.h = std::isfinite(shortest) ? std::min(0.01, shortest / 10.0) : 0.01;
    }
    if (!(cfg.h > 0.0) || !(cfg.t_end > 0.0)) throw InputError("simulation step and end time must be > 0");
    if (doc.simulation.record_every) {
        cfg.record_every = *doc.simulation.record_every;
    } else {
        cfg.record_every = std::max(1, static_cast<int>(std::floor(cfg.t_end / cfg.h / 5000.0)));
    }
    if (!doc.simulation.history.empty()) {
        cfg.history = doc.simulation.history;
    } else {
        Vector start = reference_state(doc);
        for (double& x : start) x += 1.0;
        cfg.history = SimConfig::constant_history(start);
    }
    return cfg;
}

}  // namespace delaystab
