#include "consensus/config.hpp"

#include "consensus/io.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <variant>

namespace consensus::config {

namespace {

// ---------------------------------------------------------------------------
// TOML-subset parser: [section] / [section.sub] headers, key = value pairs,
// strings, booleans, numbers and (nested, possibly multi-line) arrays.
// ---------------------------------------------------------------------------

struct Value;
using Array = std::vector<Value>;

struct Value {
    std::variant<double, bool, std::string, Array> data;
    std::string raw;  // original token for numbers (exact integer round trip)
};

struct Entry {
    std::string key;
    Value value;
    int line = 0;
};

struct Section {
    std::string name;
    std::vector<Entry> entries;
};

class Parser {
  public:
    explicit Parser(const std::string& text) : text_(text) {}

    std::vector<Section> parse() {
        std::vector<Section> sections;
        sections.push_back({"", {}});
        skip_filler();
        while (!eof()) {
            if (peek() == '[') {
                sections.push_back({parse_header(), {}});
            } else {
                sections.back().entries.push_back(parse_entry());
            }
            skip_filler();
        }
        return sections;
    }

  private:
    bool eof() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
        }
        ++pos_;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("line " + std::to_string(line_), what);
    }

    // whitespace, newlines and comments between statements
    void skip_filler() {
        while (!eof()) {
            const char c = peek();
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (c == '#') {
                while (!eof() && peek() != '\n') {
                    advance();
                }
            } else {
                break;
            }
        }
    }

    // spaces and tabs only (stay on the logical line)
    void skip_blanks() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) {
            advance();
        }
    }

    std::string parse_header() {
        advance();  // '['
        std::string name;
        while (!eof() && peek() != ']') {
            if (peek() == '\n') {
                fail("unterminated section header");
            }
            name += peek();
            advance();
        }
        if (eof()) {
            fail("unterminated section header");
        }
        advance();  // ']'
        // trim
        while (!name.empty() && std::isspace(static_cast<unsigned char>(name.front()))) {
            name.erase(name.begin());
        }
        while (!name.empty() && std::isspace(static_cast<unsigned char>(name.back()))) {
            name.pop_back();
        }
        if (name.empty()) {
            fail("empty section name");
        }
        return name;
    }

    Entry parse_entry() {
        Entry e;
        e.line = line_;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) {
            e.key += peek();
            advance();
        }
        if (e.key.empty()) {
            fail("expected a key");
        }
        skip_blanks();
        if (eof() || peek() != '=') {
            fail("expected '=' after key '" + e.key + "'");
        }
        advance();
        skip_filler();  // the value may start on the next line
        e.value = parse_value();
        return e;
    }

    Value parse_value() {
        if (eof()) {
            fail("expected a value");
        }
        const char c = peek();
        if (c == '[') {
            return parse_array();
        }
        if (c == '"') {
            return parse_string();
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            return parse_boolean();
        }
        return parse_number();
    }

    Value parse_array() {
        advance();  // '['
        Array items;
        while (true) {
            skip_filler();
            if (eof()) {
                fail("unterminated array");
            }
            if (peek() == ']') {
                advance();
                break;
            }
            items.push_back(parse_value());
            skip_filler();
            if (!eof() && peek() == ',') {
                advance();
            } else if (!eof() && peek() != ']') {
                fail("expected ',' or ']' in array");
            }
        }
        Value v;
        v.data = std::move(items);
        return v;
    }

    Value parse_string() {
        advance();  // '"'
        std::string s;
        while (!eof() && peek() != '"') {
            char c = peek();
            if (c == '\\') {
                advance();
                if (eof()) {
                    fail("unterminated string escape");
                }
                switch (peek()) {
                    case 'n': c = '\n'; break;
                    case 't': c = '\t'; break;
                    case '"': c = '"'; break;
                    case '\\': c = '\\'; break;
                    default: fail("unsupported string escape");
                }
            }
            s += c;
            advance();
        }
        if (eof()) {
            fail("unterminated string");
        }
        advance();  // '"'
        Value v;
        v.data = std::move(s);
        return v;
    }

    Value parse_boolean() {
        std::string word;
        while (!eof() && std::isalpha(static_cast<unsigned char>(peek()))) {
            word += peek();
            advance();
        }
        Value v;
        if (word == "true") {
            v.data = true;
        } else if (word == "false") {
            v.data = false;
        } else {
            fail("unexpected word '" + word + "'");
        }
        return v;
    }

    Value parse_number() {
        std::string token;
        while (!eof() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '+' ||
                          peek() == '-' || peek() == '.' || peek() == 'e' || peek() == 'E')) {
            token += peek();
            advance();
        }
        char* end = nullptr;
        const double parsed = std::strtod(token.c_str(), &end);
        if (token.empty() || end != token.c_str() + token.size()) {
            fail("malformed number '" + token + "'");
        }
        Value v;
        v.data = parsed;
        v.raw = token;
        return v;
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    int line_ = 1;
};

// ---------------------------------------------------------------------------
// Typed extraction
// ---------------------------------------------------------------------------

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
    throw ConfigError(field, what);
}

double as_number(const Value& v, const std::string& field) {
    if (const double* d = std::get_if<double>(&v.data)) {
        return *d;
    }
    field_error(field, "expected a number");
}

bool as_bool(const Value& v, const std::string& field) {
    if (const bool* b = std::get_if<bool>(&v.data)) {
        return *b;
    }
    field_error(field, "expected true or false");
}

std::string as_string(const Value& v, const std::string& field) {
    if (const std::string* s = std::get_if<std::string>(&v.data)) {
        return *s;
    }
    field_error(field, "expected a quoted string");
}

std::uint64_t as_u64(const Value& v, const std::string& field) {
    if (!std::holds_alternative<double>(v.data) || v.raw.empty()) {
        field_error(field, "expected an unsigned integer");
    }
    for (const char c : v.raw) {
        if (!std::isdigit(static_cast<unsigned char>(c))) {
            field_error(field, "expected an unsigned integer");
        }
    }
    return std::strtoull(v.raw.c_str(), nullptr, 10);
}

std::vector<double> as_vector(const Value& v, const std::string& field) {
    const Array* arr = std::get_if<Array>(&v.data);
    if (arr == nullptr) {
        field_error(field, "expected an array of numbers");
    }
    std::vector<double> out;
    for (const Value& item : *arr) {
        out.push_back(as_number(item, field));
    }
    return out;
}

Matrix as_matrix(const Value& v, const std::string& field) {
    const Array* rows = std::get_if<Array>(&v.data);
    if (rows == nullptr || rows->empty()) {
        field_error(field, "expected a nonempty array of rows");
    }
    std::vector<std::vector<double>> data;
    for (const Value& row : *rows) {
        data.push_back(as_vector(row, field));
        if (data.back().size() != data.front().size()) {
            field_error(field, "rows must have equal length");
        }
        if (data.back().empty()) {
            field_error(field, "rows must be nonempty");
        }
    }
    Matrix M(static_cast<Eigen::Index>(data.size()),
             static_cast<Eigen::Index>(data.front().size()));
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t j = 0; j < data[i].size(); ++j) {
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data[i][j];
        }
    }
    return M;
}

// Serialization helpers --------------------------------------------------

std::string vector_to_toml(const std::vector<double>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        out += io::format_double(v[i]);
    }
    out += "]";
    return out;
}

std::string matrix_to_toml(const Matrix& M) {
    std::string out = "[";
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        if (i > 0) {
            out += ",\n     ";
        }
        out += "[";
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            if (j > 0) {
                out += ", ";
            }
            out += io::format_double(M(i, j));
        }
        out += "]";
    }
    out += "]";
    return out;
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
        }
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_toml(const std::string& text) {
    const std::vector<Section> sections = Parser(text).parse();
    ExperimentConfig cfg;
    bool have_A = false, have_B = false, have_w0 = false;

    for (const Section& sec : sections) {
        if (sec.name.empty()) {
            if (!sec.entries.empty()) {
                field_error(sec.entries.front().key, "keys must appear inside a section");
            }
            continue;
        }
        const auto field = [&sec](const Entry& e) { return sec.name + "." + e.key; };

        if (sec.name == "model") {
            for (const Entry& e : sec.entries) {
                if (e.key == "A") {
                    cfg.A = as_matrix(e.value, field(e));
                    have_A = true;
                } else if (e.key == "B") {
                    cfg.B = as_matrix(e.value, field(e));
                    have_B = true;
                } else if (e.key == "C") {
                    cfg.C = as_matrix(e.value, field(e));
                } else if (e.key == "Q") {
                    cfg.Q = as_matrix(e.value, field(e));
                } else {
                    field_error(field(e), "unknown key");
                }
            }
        } else if (sec.name == "gains") {
            for (const Entry& e : sec.entries) {
                if (e.key == "K") {
                    cfg.K = as_matrix(e.value, field(e));
                } else if (e.key == "H") {
                    cfg.H = as_matrix(e.value, field(e));
                } else if (e.key == "gamma") {
                    cfg.gamma = as_vector(e.value, field(e));
                } else if (e.key == "margin") {
                    cfg.margin = as_number(e.value, field(e));
                } else {
                    field_error(field(e), "unknown key");
                }
            }
        } else if (sec.name == "family") {
            for (const Entry& e : sec.entries) {
                if (e.key == "alpha_floor") {
                    cfg.alpha_floor = as_number(e.value, field(e));
                } else {
                    field_error(field(e), "unknown key");
                }
            }
        } else if (sec.name.rfind("family.", 0) == 0) {
            const std::string name = sec.name.substr(7);
            Matrix weights;
            bool have_weights = false;
            for (const Entry& e : sec.entries) {
                if (e.key == "weights") {
                    weights = as_matrix(e.value, field(e));
                    have_weights = true;
                } else {
                    field_error(field(e), "unknown key");
                }
            }
            if (!have_weights) {
                field_error(sec.name + ".weights", "missing weight matrix");
            }
            cfg.graphs.emplace_back(name, std::move(weights));
        } else if (sec.name == "schedule") {
            for (const Entry& e : sec.entries) {
                if (e.key == "seed") {
                    cfg.seed = as_u64(e.value, field(e));
                } else if (e.key == "dwell") {
                    const auto d = as_vector(e.value, field(e));
                    if (d.size() != 2) {
                        field_error(field(e), "expected [low, high]");
                    }
                    cfg.dwell_low = d[0];
                    cfg.dwell_high = d[1];
                } else if (e.key == "horizon") {
                    cfg.horizon = as_number(e.value, field(e));
                } else if (e.key == "switch_times") {
                    cfg.switch_times = as_vector(e.value, field(e));
                } else if (e.key == "modes") {
                    const auto m = as_vector(e.value, field(e));
                    std::vector<int> modes;
                    for (const double x : m) {
                        modes.push_back(static_cast<int>(x));
                    }
                    cfg.modes = std::move(modes);
                } else {
                    field_error(field(e), "unknown key");
                }
            }
        } else if (sec.name == "initial") {
            for (const Entry& e : sec.entries) {
                if (e.key == "w") {
                    cfg.w0 = as_matrix(e.value, field(e));
                    have_w0 = true;
                } else if (e.key == "eta") {
                    cfg.eta0 = as_matrix(e.value, field(e));
                } else if (e.key == "eta_scale") {
                    cfg.eta_scale = as_number(e.value, field(e));
                } else if (e.key == "w_hat") {
                    cfg.what0 = as_matrix(e.value, field(e));
                } else {
                    field_error(field(e), "unknown key");
                }
            }
        } else if (sec.name == "run") {
            for (const Entry& e : sec.entries) {
                if (e.key == "engine") {
                    cfg.engine = as_string(e.value, field(e));
                } else if (e.key == "step") {
                    cfg.step = as_number(e.value, field(e));
                } else if (e.key == "strict_jordan") {
                    cfg.strict_jordan = as_bool(e.value, field(e));
                } else if (e.key == "out") {
                    cfg.out_dir = as_string(e.value, field(e));
                } else {
                    field_error(field(e), "unknown key");
                }
            }
        } else {
            field_error(sec.name, "unknown section");
        }
    }

    if (!have_A) {
        field_error("model.A", "missing");
    }
    if (!have_B) {
        field_error("model.B", "missing");
    }
    if (!have_w0) {
        field_error("initial.w", "missing");
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path, "cannot open config file");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_toml(buf.str());
}

void ExperimentConfig::validate() const {
    const int dim = n();
    if (A.rows() != A.cols() || dim < 1) {
        field_error("model.A", "must be square and nonempty");
    }
    if (B.rows() != dim || B.cols() < 1) {
        field_error("model.B", "must have n rows");
    }
    if (C && C->cols() != dim) {
        field_error("model.C", "must have n columns");
    }
    if (Q && (Q->rows() != dim || Q->cols() != dim)) {
        field_error("model.Q", "must be n x n");
    }
    if (K && (K->rows() != B.cols() || K->cols() != dim)) {
        field_error("gains.K", "must be n_B x n");
    }
    if (H) {
        if (!C) {
            field_error("gains.H", "requires model.C");
        }
        if (H->rows() != dim || H->cols() != C->rows()) {
            field_error("gains.H", "must be n x p");
        }
    }
    if (gamma && static_cast<int>(gamma->size()) != dim) {
        field_error("gains.gamma", "must have n entries");
    }
    if (gamma) {
        for (const double g : *gamma) {
            if (!(g > 0.0)) {
                field_error("gains.gamma", "entries must be positive");
            }
        }
    }
    if (!(margin > 0.0)) {
        field_error("gains.margin", "must be positive");
    }
    if (graphs.empty()) {
        field_error("family", "at least one graph is required");
    }
    const auto m = graphs.front().second.rows();
    for (const auto& [name, weights] : graphs) {
        if (weights.rows() != weights.cols() || weights.rows() != m) {
            field_error("family." + name + ".weights",
                        "must be square with a shared agent count");
        }
    }
    if (!(alpha_floor > 0.0)) {
        field_error("family.alpha_floor", "must be positive");
    }
    if (!(dwell_low > 0.0) || !(dwell_low <= dwell_high)) {
        field_error("schedule.dwell", "need 0 < low <= high");
    }
    if (!(horizon > 0.0)) {
        field_error("schedule.horizon", "must be positive");
    }
    if (switch_times.has_value() != modes.has_value()) {
        field_error("schedule", "switch_times and modes must be given together");
    }
    if (modes) {
        if (switch_times->size() != modes->size() + 1) {
            field_error("schedule.switch_times", "need one more entry than modes");
        }
        for (const int mode : *modes) {
            if (mode < 1 || mode > static_cast<int>(graphs.size())) {
                field_error("schedule.modes", "mode index out of range (1-based)");
            }
        }
    }
    if (w0.rows() != m || w0.cols() != dim) {
        field_error("initial.w", "must be m x n");
    }
    if (eta0 && (eta0->rows() != m || eta0->cols() != dim)) {
        field_error("initial.eta", "must be m x n");
    }
    if (what0 && (what0->rows() != m || what0->cols() != dim)) {
        field_error("initial.w_hat", "must be m x n");
    }
    if (engine != "modal" && engine != "ode" && engine != "both") {
        field_error("run.engine", "must be modal, ode or both");
    }
    if (step < 0.0) {
        field_error("run.step", "must be nonnegative");
    }
    if (out_dir.empty()) {
        field_error("run.out", "must be a nonempty path");
    }
}

std::string ExperimentConfig::to_toml() const {
    std::ostringstream out;
    out << "[model]\n";
    out << "A = " << matrix_to_toml(A) << "\n";
    out << "B = " << matrix_to_toml(B) << "\n";
    if (C) {
        out << "C = " << matrix_to_toml(*C) << "\n";
    }
    if (Q) {
        out << "Q = " << matrix_to_toml(*Q) << "\n";
    }

    out << "\n[gains]\n";
    if (K) {
        out << "K = " << matrix_to_toml(*K) << "\n";
    }
    if (H) {
        out << "H = " << matrix_to_toml(*H) << "\n";
    }
    if (gamma) {
        out << "gamma = " << vector_to_toml(*gamma) << "\n";
    }
    out << "margin = " << io::format_double(margin) << "\n";

    out << "\n[family]\n";
    out << "alpha_floor = " << io::format_double(alpha_floor) << "\n";
    for (const auto& [name, weights] : graphs) {
        out << "\n[family." << name << "]\n";
        out << "weights = " << matrix_to_toml(weights) << "\n";
    }

    out << "\n[schedule]\n";
    out << "seed = " << seed << "\n";
    out << "dwell = " << vector_to_toml({dwell_low, dwell_high}) << "\n";
    out << "horizon = " << io::format_double(horizon) << "\n";
    if (switch_times) {
        out << "switch_times = " << vector_to_toml(*switch_times) << "\n";
    }
    if (modes) {
        std::vector<double> as_doubles(modes->begin(), modes->end());
        out << "modes = " << vector_to_toml(as_doubles) << "\n";
    }

    out << "\n[initial]\n";
    out << "w = " << matrix_to_toml(w0) << "\n";
    if (eta0) {
        out << "eta = " << matrix_to_toml(*eta0) << "\n";
    }
    out << "eta_scale = " << io::format_double(eta_scale) << "\n";
    if (what0) {
        out << "w_hat = " << matrix_to_toml(*what0) << "\n";
    }

    out << "\n[run]\n";
    out << "engine = " << quote(engine) << "\n";
    out << "step = " << io::format_double(step) << "\n";
    out << "strict_jordan = " << (strict_jordan ? "true" : "false") << "\n";
    out << "out = " << quote(out_dir) << "\n";
    return out.str();
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    return a.to_toml() == b.to_toml();
}

}  // namespace consensus::config
