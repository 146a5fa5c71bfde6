#include "exante/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "exante/error.hpp"

namespace exante {

namespace {

constexpr double kTol = 1e-9;

bool in_range(double v, double lo, double hi) { return v >= lo - kTol && v <= hi + kTol; }

bool in_hull(double v, const std::vector<double>& levels) {
    if (levels.empty()) return false;
    const auto [lo, hi] = std::minmax_element(levels.begin(), levels.end());
    return in_range(v, *lo, *hi);
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    std::string out(s.substr(b, e - b));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"')
        out = out.substr(1, out.size() - 2);
    return out;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string current;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
            current.push_back(c);
        } else if (c == ',' && !quoted) {
            cells.push_back(trim(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    cells.push_back(trim(current));
    return cells;
}

std::string format_number(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

}  // namespace

std::string to_string(Attribute a) {
    switch (a) {
        case Attribute::wage_pub: return "wage_pub";
        case Attribute::wage_priv: return "wage_priv";
        case Attribute::employer_pub: return "employer_pub";
        case Attribute::employer_priv: return "employer_priv";
        case Attribute::hours_pub: return "hours_pub";
        case Attribute::hours_priv: return "hours_priv";
        case Attribute::layoff_pub: return "layoff_pub";
        case Attribute::layoff_priv: return "layoff_priv";
        case Attribute::promo_pub: return "promo_pub";
        case Attribute::promo_priv: return "promo_priv";
    }
    return "?";
}

Attribute parse_attribute(const std::string& name) {
    static const std::unordered_map<std::string, Attribute> table{
        {"wage_pub", Attribute::wage_pub},       {"wage_priv", Attribute::wage_priv},
        {"employer_pub", Attribute::employer_pub}, {"employer_priv", Attribute::employer_priv},
        {"hours_pub", Attribute::hours_pub},     {"hours_priv", Attribute::hours_priv},
        {"layoff_pub", Attribute::layoff_pub},   {"layoff_priv", Attribute::layoff_priv},
        {"promo_pub", Attribute::promo_pub},     {"promo_priv", Attribute::promo_priv},
    };
    const auto it = table.find(name);
    if (it == table.end()) throw DatasetError("unknown attribute '" + name + "'");
    return it->second;
}

double attribute_value(const Scenario& x, Attribute a) {
    switch (a) {
        case Attribute::wage_pub: return x.wage_pub;
        case Attribute::wage_priv: return x.wage_priv;
        case Attribute::employer_pub:
            return x.employer_pub == PublicEmployer::public_firm ? 1.0 : 0.0;
        case Attribute::employer_priv:
            return x.employer_priv == PrivateEmployer::large_firm ? 1.0 : 0.0;
        case Attribute::hours_pub: return x.hours_pub;
        case Attribute::hours_priv: return x.hours_priv;
        case Attribute::layoff_pub: return x.layoff_pub;
        case Attribute::layoff_priv: return x.layoff_priv;
        case Attribute::promo_pub: return x.promo_pub;
        case Attribute::promo_priv: return x.promo_priv;
    }
    return 0.0;
}

void shift_attribute(Scenario& x, Attribute a, double delta) {
    switch (a) {
        case Attribute::wage_pub: x.wage_pub += delta; break;
        case Attribute::wage_priv: x.wage_priv += delta; break;
        case Attribute::employer_pub:
            if (std::abs(delta) >= 0.5)
                x.employer_pub = x.employer_pub == PublicEmployer::administration
                                     ? PublicEmployer::public_firm
                                     : PublicEmployer::administration;
            break;
        case Attribute::employer_priv:
            if (std::abs(delta) >= 0.5)
                x.employer_priv = x.employer_priv == PrivateEmployer::sme
                                      ? PrivateEmployer::large_firm
                                      : PrivateEmployer::sme;
            break;
        case Attribute::hours_pub: x.hours_pub += delta; break;
        case Attribute::hours_priv: x.hours_priv += delta; break;
        case Attribute::layoff_pub: x.layoff_pub += delta; break;
        case Attribute::layoff_priv: x.layoff_priv += delta; break;
        case Attribute::promo_pub: x.promo_pub += delta; break;
        case Attribute::promo_priv: x.promo_priv += delta; break;
    }
}

std::string to_string(PublicEmployer e) {
    return e == PublicEmployer::administration ? "administration" : "public_firm";
}

std::string to_string(PrivateEmployer e) {
    return e == PrivateEmployer::sme ? "sme" : "large_firm";
}

PublicEmployer parse_public_employer(const std::string& s) {
    if (s == "administration" || s == "0") return PublicEmployer::administration;
    if (s == "public_firm" || s == "1") return PublicEmployer::public_firm;
    throw DatasetError("unknown public employer '" + s + "'");
}

PrivateEmployer parse_private_employer(const std::string& s) {
    if (s == "sme" || s == "0") return PrivateEmployer::sme;
    if (s == "large_firm" || s == "1") return PrivateEmployer::large_firm;
    throw DatasetError("unknown private employer '" + s + "'");
}

void SupportSpec::check() const {
    for (const auto* w : {&wage_pub, &wage_priv}) {
        if (!(w->min <= w->max)) throw DatasetError("support: wage min > max");
        if (!(w->step > 0)) throw DatasetError("support: wage step must be positive");
    }
    for (const auto* levels :
         {&hours_pub, &hours_priv, &layoff_pub, &layoff_priv, &promo_pub, &promo_priv}) {
        if (levels->empty()) throw DatasetError("support: empty level list");
    }
    if (employer_pub.empty() || employer_priv.empty())
        throw DatasetError("support: empty employer list");
}

bool SupportSpec::contains(const Scenario& x) const {
    return in_range(x.wage_pub, wage_pub.min, wage_pub.max) &&
           in_range(x.wage_priv, wage_priv.min, wage_priv.max) &&
           std::find(employer_pub.begin(), employer_pub.end(), x.employer_pub) !=
               employer_pub.end() &&
           std::find(employer_priv.begin(), employer_priv.end(), x.employer_priv) !=
               employer_priv.end() &&
           in_hull(x.hours_pub, hours_pub) && in_hull(x.hours_priv, hours_priv) &&
           in_hull(x.layoff_pub, layoff_pub) && in_hull(x.layoff_priv, layoff_priv) &&
           in_hull(x.promo_pub, promo_pub) && in_hull(x.promo_priv, promo_priv);
}

SupportSpec SupportSpec::job_choice_experiment() { return SupportSpec{}; }

bool in_identified_region(const SupportSpec& support, double s, const Scenario& x) {
    return support.contains(x.shifted(s));
}

Dataset::Dataset(std::vector<ChoiceRecord> records, SupportSpec support)
    : records_(std::move(records)), support_(std::move(support)) {
    if (records_.empty()) throw DatasetError("no records");
    support_.check();
    std::unordered_map<std::string, std::size_t> ids;
    respondent_index_.reserve(records_.size());
    for (const auto& r : records_) {
        auto [it, inserted] = ids.try_emplace(r.respondent_id, ids.size());
        respondent_index_.push_back(it->second);
    }
    respondent_count_ = ids.size();
}

const std::vector<std::string>& canonical_columns() {
    static const std::vector<std::string> cols{
        "respondent_id", "scenario_index", "p_stated",   "wage_pub",    "wage_priv",
        "employer_pub",  "employer_priv",  "hours_pub",  "hours_priv",  "layoff_pub",
        "layoff_priv",   "promo_pub",      "promo_priv"};
    return cols;
}

SupportSpec infer_support(const std::vector<ChoiceRecord>& records) {
    SupportSpec s;
    if (records.empty()) return s;
    auto wage_range = [&](auto get) {
        WageRange w{INFINITY, -INFINITY, 50};
        for (const auto& r : records) {
            w.min = std::min(w.min, get(r.scenario));
            w.max = std::max(w.max, get(r.scenario));
        }
        return w;
    };
    s.wage_pub = wage_range([](const Scenario& x) { return x.wage_pub; });
    s.wage_priv = wage_range([](const Scenario& x) { return x.wage_priv; });
    auto levels = [&](auto get) {
        std::set<double> v;
        for (const auto& r : records) v.insert(get(r.scenario));
        return std::vector<double>(v.begin(), v.end());
    };
    s.hours_pub = levels([](const Scenario& x) { return x.hours_pub; });
    s.hours_priv = levels([](const Scenario& x) { return x.hours_priv; });
    s.layoff_pub = levels([](const Scenario& x) { return x.layoff_pub; });
    s.layoff_priv = levels([](const Scenario& x) { return x.layoff_priv; });
    s.promo_pub = levels([](const Scenario& x) { return x.promo_pub; });
    s.promo_priv = levels([](const Scenario& x) { return x.promo_priv; });
    std::set<PublicEmployer> ep;
    std::set<PrivateEmployer> eq;
    for (const auto& r : records) {
        ep.insert(r.scenario.employer_pub);
        eq.insert(r.scenario.employer_priv);
    }
    s.employer_pub.assign(ep.begin(), ep.end());
    s.employer_priv.assign(eq.begin(), eq.end());
    return s;
}

Dataset load_dataset(const std::filesystem::path& path, const CsvSchema& schema,
                     const std::optional<SupportSpec>& support) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open '" + path.string() + "'");
    std::string line;
    std::vector<std::string> header;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        header = split_csv(line);
        break;
    }
    if (header.empty()) throw DatasetError("no records");

    std::map<std::string, std::size_t> position;
    for (const auto& canon : canonical_columns()) {
        const auto mapped = schema.columns.find(canon);
        const std::string& name = mapped == schema.columns.end() ? canon : mapped->second;
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw DatasetError("missing column '" + name + "'");
        position[canon] = static_cast<std::size_t>(it - header.begin());
    }

    std::vector<ChoiceRecord> records;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto cells = split_csv(line);
        const std::string row = "row " + std::to_string(line_no) + ": ";
        auto cell = [&](const std::string& canon) -> const std::string& {
            const std::size_t i = position.at(canon);
            if (i >= cells.size()) throw DatasetError(row + "missing cell '" + canon + "'");
            return cells[i];
        };
        auto number = [&](const std::string& canon) {
            const std::string& text = cell(canon);
            double v = 0;
            auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
            if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
                throw DatasetError(row + "unparseable value '" + text + "' in column '" +
                                   canon + "'");
            return v;
        };
        auto probability = [&](const std::string& canon) {
            const double v = number(canon);
            if (v < 0.0 || v > 1.0)
                throw DatasetError(row + "probability out of range in column '" + canon + "'");
            return v;
        };
        ChoiceRecord r;
        r.respondent_id = cell("respondent_id");
        const double idx = number("scenario_index");
        if (idx < 1 || idx != std::floor(idx))
            throw DatasetError(row + "scenario_index must be a positive integer");
        r.scenario_index = static_cast<int>(idx);
        r.p_stated = probability("p_stated");
        Scenario& x = r.scenario;
        x.wage_pub = number("wage_pub") / schema.wage_divisor;
        x.wage_priv = number("wage_priv") / schema.wage_divisor;
        if (x.wage_pub <= 0 || x.wage_priv <= 0)
            throw DatasetError(row + "wages must be positive");
        try {
            x.employer_pub = parse_public_employer(cell("employer_pub"));
            x.employer_priv = parse_private_employer(cell("employer_priv"));
        } catch (const DatasetError& e) {
            throw DatasetError(row + e.what());
        }
        x.hours_pub = number("hours_pub");
        x.hours_priv = number("hours_priv");
        for (double h : {x.hours_pub, x.hours_priv})
            if (h <= 0 || h >= 100) throw DatasetError(row + "hours out of range");
        x.layoff_pub = probability("layoff_pub");
        x.layoff_priv = probability("layoff_priv");
        x.promo_pub = probability("promo_pub");
        x.promo_priv = probability("promo_priv");
        records.push_back(std::move(r));
    }
    if (records.empty()) throw DatasetError("no records");
    SupportSpec spec = support ? *support : infer_support(records);
    return Dataset(std::move(records), std::move(spec));
}

std::string dataset_to_csv(const Dataset& d, const std::vector<std::string>& comment) {
    std::ostringstream out;
    for (const auto& c : comment) out << "# " << c << '\n';
    const auto& cols = canonical_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    for (const auto& r : d.records()) {
        const Scenario& x = r.scenario;
        out << r.respondent_id << ',' << r.scenario_index << ',' << format_number(r.p_stated)
            << ',' << format_number(x.wage_pub) << ',' << format_number(x.wage_priv) << ','
            << to_string(x.employer_pub) << ',' << to_string(x.employer_priv) << ','
            << format_number(x.hours_pub) << ',' << format_number(x.hours_priv) << ','
            << format_number(x.layoff_pub) << ',' << format_number(x.layoff_priv) << ','
            << format_number(x.promo_pub) << ',' << format_number(x.promo_priv) << '\n';
    }
    return out.str();
}

void save_dataset(const Dataset& d, const std::filesystem::path& path,
                  const std::vector<std::string>& comment) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DatasetError("cannot write '" + path.string() + "'");
    out << dataset_to_csv(d, comment);
}

ValidationReport validate(const Dataset& d) {
    ValidationReport rep;
    rep.records = d.size();
    rep.respondents = d.respondent_count();
    std::set<std::pair<std::string, int>> keys;
    std::vector<std::size_t> per_respondent(d.respondent_count(), 0);
    std::size_t heaped = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& r = d.records()[i];
        if (!d.support().contains(r.scenario)) ++rep.out_of_support;
        if (!keys.emplace(r.respondent_id, r.scenario_index).second) ++rep.duplicate_keys;
        const double tenths = r.p_stated * 10.0;
        if (std::abs(tenths - std::round(tenths)) < 1e-6) ++heaped;
        ++per_respondent[d.respondent_index()[i]];
    }
    rep.heaping_share = static_cast<double>(heaped) / static_cast<double>(d.size());
    for (std::size_t n : per_respondent) {
        if (n < 2) ++rep.single_scenario_respondents;
        else ++rep.paired_count;
    }
    return rep;
}

}  // namespace exante
