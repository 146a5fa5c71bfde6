#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace exante {

// Option coding follows the job-choice application: option 0 is the private
// sector offer and option 1 the public sector offer. The stated probability is
// the chance of choosing option 1, and ex ante returns are the transfer to the
// option-0 (private) wage that makes the respondent indifferent.

enum class PublicEmployer { administration, public_firm };
enum class PrivateEmployer { sme, large_firm };

/// Manipulable scenario attributes. Wages in kCFA (thousands of CFA francs)
/// per month, hours per week, layoff/promotion chances as probabilities.
struct Scenario {
    double wage_pub = 500;
    double wage_priv = 500;
    PublicEmployer employer_pub = PublicEmployer::administration;
    PrivateEmployer employer_priv = PrivateEmployer::sme;
    double hours_pub = 40;
    double hours_priv = 40;
    double layoff_pub = 0.05;
    double layoff_priv = 0.05;
    double promo_pub = 0.10;
    double promo_priv = 0.10;

    double wage_option0() const { return wage_priv; }
    double wage_option1() const { return wage_pub; }

    /// Copy with the option-0 wage raised by s.
    Scenario shifted(double s) const {
        Scenario out = *this;
        out.wage_priv += s;
        return out;
    }

    bool operator==(const Scenario&) const = default;
};

/// Named scenario attributes; used for attribute shifts h and loadings.
enum class Attribute {
    wage_pub,
    wage_priv,
    employer_pub,
    employer_priv,
    hours_pub,
    hours_priv,
    layoff_pub,
    layoff_priv,
    promo_pub,
    promo_priv,
};

std::string to_string(Attribute a);
Attribute parse_attribute(const std::string& name);
/// Numeric value of an attribute (employers as 0/1 indicators).
double attribute_value(const Scenario& x, Attribute a);
/// Adds delta to a numeric attribute; employer attributes flip on |delta| >= 0.5.
void shift_attribute(Scenario& x, Attribute a, double delta);

std::string to_string(PublicEmployer e);
std::string to_string(PrivateEmployer e);
PublicEmployer parse_public_employer(const std::string& s);
PrivateEmployer parse_private_employer(const std::string& s);

struct WageRange {
    double min = 300;
    double max = 1000;
    double step = 50;
};

/// Admissible attribute values of a choice experiment.
struct SupportSpec {
    WageRange wage_pub;
    WageRange wage_priv;
    std::vector<PublicEmployer> employer_pub{PublicEmployer::administration,
                                             PublicEmployer::public_firm};
    std::vector<PrivateEmployer> employer_priv{PrivateEmployer::sme,
                                               PrivateEmployer::large_firm};
    std::vector<double> hours_pub{35, 40};
    std::vector<double> hours_priv{40, 50, 60};
    std::vector<double> layoff_pub{0.02, 0.05, 0.10};
    std::vector<double> layoff_priv{0.10, 0.20, 0.30};
    std::vector<double> promo_pub{0.05, 0.10, 0.20};
    std::vector<double> promo_priv{0.05, 0.10, 0.20};

    /// Throws DatasetError if min > max, step <= 0 or a level list is empty.
    void check() const;

    /// Wages inside [min, max]; numeric attributes inside the hull of their
    /// levels; employers members of their level set.
    bool contains(const Scenario& x) const;

    /// Attribute levels of the Ivorian job-choice survey.
    static SupportSpec job_choice_experiment();
};

/// True iff raising the option-0 wage by s keeps the scenario inside support.
bool in_identified_region(const SupportSpec& support, double s, const Scenario& x);

struct ChoiceRecord {
    std::string respondent_id;
    int scenario_index = 1;
    Scenario scenario;
    double p_stated = 0.5;
};

/// Stated-choice data. Immutable once built; safe for concurrent reads.
class Dataset {
public:
    Dataset(std::vector<ChoiceRecord> records, SupportSpec support);

    const std::vector<ChoiceRecord>& records() const { return records_; }
    const SupportSpec& support() const { return support_; }
    std::size_t size() const { return records_.size(); }

    /// Respondent id of each record mapped to a dense 0-based index, in order
    /// of first appearance.
    const std::vector<std::size_t>& respondent_index() const { return respondent_index_; }
    std::size_t respondent_count() const { return respondent_count_; }

private:
    std::vector<ChoiceRecord> records_;
    SupportSpec support_;
    std::vector<std::size_t> respondent_index_;
    std::size_t respondent_count_ = 0;
};

/// Maps canonical column names to the names used in the file. Missing
/// entries mean the canonical name is used.
struct CsvSchema {
    std::map<std::string, std::string> columns;
    /// Divisor applied to wage columns to obtain kCFA (1 for kCFA files,
    /// 1000 for files in CFA francs).
    double wage_divisor = 1.0;
};

const std::vector<std::string>& canonical_columns();

/// Reads a stated-choice CSV. Lines starting with '#' are skipped. Without an
/// explicit support the SupportSpec is inferred from observed min/max and
/// observed levels.
Dataset load_dataset(const std::filesystem::path& path, const CsvSchema& schema = {},
                     const std::optional<SupportSpec>& support = std::nullopt);

/// Writes the canonical CSV schema; numbers in shortest round-trip form.
/// `comment` lines, if given, are prefixed with '#'.
void save_dataset(const Dataset& d, const std::filesystem::path& path,
                  const std::vector<std::string>& comment = {});
std::string dataset_to_csv(const Dataset& d, const std::vector<std::string>& comment = {});

SupportSpec infer_support(const std::vector<ChoiceRecord>& records);

struct ValidationReport {
    std::size_t records = 0;
    std::size_t respondents = 0;
    std::size_t out_of_support = 0;
    std::size_t duplicate_keys = 0;
    /// Share of stated probabilities lying on a multiple of 0.10.
    double heaping_share = 0.0;
    /// Respondents with a single elicited scenario.
    std::size_t single_scenario_respondents = 0;
    /// Respondents with at least two scenarios (usable for qWTP/mWTP).
    std::size_t paired_count = 0;
    bool wtp_gate_open() const { return paired_count > 0; }
};

ValidationReport validate(const Dataset& d);

}  // namespace exante
