#include "levystop/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "levystop/errors.hpp"

namespace levystop {

namespace {

void require_object(const Json& j, std::string_view what) {
    if (!j.is_object()) throw InputError(std::string(what) + " must be a JSON object");
}

void check_keys(const Json& j, const std::set<std::string>& allowed, std::string_view what) {
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw InputError("unknown key '" + k + "' in " + std::string(what));
}

double number(const Json& j, const std::string& key, std::string_view what) {
    auto it = j.find(key);
    if (it == j.end()) throw InputError("missing key '" + key + "' in " + std::string(what));
    if (!it->is_number()) throw InputError("key '" + key + "' in " + std::string(what) + " must be a number");
    return it->get<double>();
}

double number_or(const Json& j, const std::string& key, double fallback, std::string_view what) {
    return j.contains(key) ? number(j, key, what) : fallback;
}

Json nullable(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

}  // namespace

Json parse_json(std::string_view text, std::string_view origin) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string(origin) + ": " + e.what());
    }
}

Json load_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_json(ss.str(), path);
}

LevyModel model_from_json(const Json& j) {
    require_object(j, "model");
    auto it = j.find("family");
    if (it == j.end() || !it->is_string()) throw InputError("model needs a string 'family'");
    const std::string fam = it->get<std::string>();
    const std::string what = "model '" + fam + "'";
    if (fam == "brownian") {
        check_keys(j, {"family", "m", "sigma"}, what);
        return BrownianDrift{number(j, "m", what), number(j, "sigma", what)};
    }
    if (fam == "kou") {
        check_keys(j, {"family", "m", "sigma", "a", "p", "eta1", "eta2"}, what);
        return KouJD{number(j, "m", what),   number(j, "sigma", what), number(j, "a", what),
                     number(j, "p", what),   number(j, "eta1", what),  number(j, "eta2", what)};
    }
    if (fam == "expjd") {
        check_keys(j, {"family", "m", "sigma", "a", "eta1"}, what);
        return ExpJD{number(j, "m", what), number(j, "sigma", what), number(j, "a", what), number(j, "eta1", what)};
    }
    if (fam == "neg_poisson") {
        check_keys(j, {"family", "a"}, what);
        return NegPoisson{number(j, "a", what)};
    }
    if (fam == "spectneg_kou") {
        check_keys(j, {"family", "m", "sigma", "a", "eta2"}, what);
        return SpectNegKou{number(j, "m", what), number(j, "sigma", what), number(j, "a", what),
                           number(j, "eta2", what)};
    }
    throw UnsupportedFamily("unknown family '" + fam +
                            "' (expected brownian, kou, expjd, neg_poisson or spectneg_kou)");
}

Json model_to_json(const LevyModel& model) {
    Json j;
    j["family"] = std::string(model.name());
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, BrownianDrift>) {
                j["m"] = p.m;
                j["sigma"] = p.sigma;
            } else if constexpr (std::is_same_v<T, KouJD>) {
                j["m"] = p.m;
                j["sigma"] = p.sigma;
                j["a"] = p.a;
                j["p"] = p.p;
                j["eta1"] = p.eta1;
                j["eta2"] = p.eta2;
            } else if constexpr (std::is_same_v<T, ExpJD>) {
                j["m"] = p.m;
                j["sigma"] = p.sigma;
                j["a"] = p.a;
                j["eta1"] = p.eta1;
            } else if constexpr (std::is_same_v<T, NegPoisson>) {
                j["a"] = p.a;
            } else {
                j["m"] = p.m;
                j["sigma"] = p.sigma;
                j["a"] = p.a;
                j["eta2"] = p.eta2;
            }
        },
        model.params());
    return j;
}

ProblemParams params_from_json(const Json& j) {
    require_object(j, "problem spec");
    check_keys(j, {"model", "r", "alpha", "c", "v"}, "problem spec");
    if (!j.contains("model")) throw InputError("missing key 'model' in problem spec");
    const std::string what = "problem spec";
    return ProblemParams{model_from_json(j.at("model")), number(j, "r", what), number(j, "alpha", what),
                         number(j, "c", what), number_or(j, "v", 1.0, what)};
}

Json params_to_json(const ProblemParams& p) {
    Json j;
    j["model"] = model_to_json(p.model);
    j["r"] = p.r;
    j["alpha"] = p.alpha;
    j["c"] = p.c;
    j["v"] = p.v;
    return j;
}

LevyModel model_from_document(const Json& j) {
    require_object(j, "document");
    if (j.contains("model")) return params_from_json(j).model;
    return model_from_json(j);
}

Json threshold_to_json(const ThresholdResult& th) {
    Json j;
    j["b_c"] = th.b_c;
    j["regime"] = std::string(regime_name(th.regime));
    j["psi1"] = th.psi1;
    j["phi_r"] = nullable(th.phi_r);
    if (th.roots) {
        Json arr = Json::array();
        for (const auto& r : {th.roots->psi0, th.roots->psi1, th.roots->psi2, th.roots->psi3})
            arr.push_back(nullable(r));
        j["roots"] = arr;
    } else {
        j["roots"] = nullptr;
    }
    j["slope_ratio"] = th.slope_ratio;
    return j;
}

double b_c_from_json(const Json& j) {
    require_object(j, "threshold document");
    double b = number(j, "b_c", "threshold document");
    if (!(b > 0.0) || !std::isfinite(b)) throw InputError("threshold document: b_c must be a positive number");
    return b;
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& os, const std::vector<std::string>& header) : os_(os), width_(header.size()) {
    for (std::size_t i = 0; i < header.size(); ++i) field(header[i], i == 0);
    os_ << "\r\n";
}

void CsvWriter::row(const std::vector<Cell>& cells) {
    if (cells.size() != width_) throw InputError("csv row width does not match header");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        std::string s;
        if (auto d = std::get_if<double>(&cells[i]))
            s = format_double(*d);
        else if (auto n = std::get_if<long long>(&cells[i]))
            s = std::to_string(*n);
        else
            s = std::get<std::string>(cells[i]);
        field(s, i == 0);
    }
    os_ << "\r\n";
}

void CsvWriter::field(const std::string& s, bool first) {
    if (!first) os_ << ',';
    if (s.find_first_of(",\"\r\n") == std::string::npos) {
        os_ << s;
        return;
    }
    os_ << '"';
    for (char ch : s) {
        if (ch == '"') os_ << '"';
        os_ << ch;
    }
    os_ << '"';
}

}  // namespace levystop
