#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "exante/dataset.hpp"
#include "exante/error.hpp"

using namespace exante;

namespace {

const char* kHeader =
    "respondent_id,scenario_index,p_stated,wage_pub,wage_priv,employer_pub,employer_priv,"
    "hours_pub,hours_priv,layoff_pub,layoff_priv,promo_pub,promo_priv\n";

std::filesystem::path write_tmp(const std::string& name, const std::string& text) {
    const auto p = std::filesystem::temp_directory_path() / ("exante_ut_" + name);
    std::ofstream(p) << text;
    return p;
}

ChoiceRecord rec(const std::string& id, int t, double p, double y0 = 500) {
    ChoiceRecord r;
    r.respondent_id = id;
    r.scenario_index = t;
    r.p_stated = p;
    r.scenario.wage_priv = y0;
    r.scenario.layoff_priv = 0.20;
    return r;
}

}  // namespace

TEST(Dataset, LoadsOneRecord) {
    const auto p = write_tmp("one.csv", std::string(kHeader) +
                                            "1,1,0.55,750,750,administration,sme,40,40,0.05,0.05,"
                                            "0.10,0.10\n");
    const Dataset d = load_dataset(p);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_DOUBLE_EQ(d.records()[0].p_stated, 0.55);
    EXPECT_DOUBLE_EQ(d.records()[0].scenario.wage_pub, 750);
}

TEST(Dataset, RejectsProbabilityOutOfRange) {
    const auto p = write_tmp("bad.csv", std::string(kHeader) +
                                            "1,1,1.2,750,750,administration,sme,40,40,0.05,0.05,"
                                            "0.10,0.10\n");
    try {
        load_dataset(p);
        FAIL() << "expected DatasetError";
    } catch (const DatasetError& e) {
        EXPECT_NE(std::string(e.what()).find("probability out of range"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("row"), std::string::npos);
    }
}

TEST(Dataset, EmptyFileHasNoRecords) {
    const auto p = write_tmp("empty.csv", "");
    try {
        load_dataset(p);
        FAIL() << "expected DatasetError";
    } catch (const DatasetError& e) {
        EXPECT_NE(std::string(e.what()).find("no records"), std::string::npos);
    }
}

TEST(Dataset, MissingColumnIsNamed) {
    const auto p = write_tmp("missing.csv", "respondent_id,scenario_index,p_stated\n1,1,0.5\n");
    try {
        load_dataset(p);
        FAIL() << "expected DatasetError";
    } catch (const DatasetError& e) {
        EXPECT_NE(std::string(e.what()).find("wage_pub"), std::string::npos);
    }
}

TEST(Dataset, SchemaRenamesAndDivides) {
    const auto p = write_tmp(
        "renamed.csv",
        "id,t,p,wpub,wpriv,employer_pub,employer_priv,hours_pub,hours_priv,layoff_pub,"
        "layoff_priv,promo_pub,promo_priv\n"
        "a,1,0.3,750000,600000,public_firm,large_firm,40,40,0.05,0.05,0.1,0.1\n");
    CsvSchema schema;
    schema.columns = {{"respondent_id", "id"}, {"scenario_index", "t"}, {"p_stated", "p"},
                      {"wage_pub", "wpub"}, {"wage_priv", "wpriv"}};
    schema.wage_divisor = 1000;
    const Dataset d = load_dataset(p, schema);
    EXPECT_DOUBLE_EQ(d.records()[0].scenario.wage_pub, 750);
    EXPECT_DOUBLE_EQ(d.records()[0].scenario.wage_priv, 600);
    EXPECT_EQ(d.records()[0].scenario.employer_pub, PublicEmployer::public_firm);
}

TEST(Dataset, CsvRoundTrip) {
    std::vector<ChoiceRecord> rs{rec("1", 1, 0.25), rec("1", 2, 0.125, 650), rec("2", 1, 1.0)};
    const Dataset d(rs, SupportSpec{});
    const auto p = std::filesystem::temp_directory_path() / "exante_ut_roundtrip.csv";
    save_dataset(d, p, {"config_hash=abc"});
    const Dataset back = load_dataset(p);
    ASSERT_EQ(back.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(back.records()[i].respondent_id, rs[i].respondent_id);
        EXPECT_EQ(back.records()[i].p_stated, rs[i].p_stated);
        EXPECT_EQ(back.records()[i].scenario, rs[i].scenario);
    }
}

TEST(Validate, HeapingShareOne) {
    const Dataset d({rec("1", 1, 0.1), rec("1", 2, 0.7), rec("2", 1, 0.0)}, SupportSpec{});
    EXPECT_DOUBLE_EQ(validate(d).heaping_share, 1.0);
}

TEST(Validate, SingleScenarioClosesWtpGate) {
    const Dataset d({rec("1", 1, 0.15), rec("2", 1, 0.5)}, SupportSpec{});
    const auto v = validate(d);
    EXPECT_EQ(v.paired_count, 0u);
    EXPECT_EQ(v.single_scenario_respondents, 2u);
    EXPECT_FALSE(v.wtp_gate_open());
}

TEST(Validate, CountsOutOfSupportAndDuplicates) {
    SupportSpec s;
    s.wage_priv = {300, 1000, 50};
    const Dataset d({rec("1", 1, 0.5, 250), rec("1", 1, 0.5), rec("1", 2, 0.3)}, s);
    const auto v = validate(d);
    EXPECT_EQ(v.out_of_support, 1u);
    EXPECT_EQ(v.duplicate_keys, 1u);
    EXPECT_EQ(v.paired_count, 1u);
}

TEST(IdentifiedRegion, RangeArithmetic) {
    SupportSpec s;
    s.wage_priv = {300, 1000, 50};
    Scenario x;
    x.wage_priv = 525;
    x.layoff_priv = 0.20;
    EXPECT_TRUE(in_identified_region(s, 400, x));
    EXPECT_FALSE(in_identified_region(s, 500, x));
    EXPECT_TRUE(in_identified_region(s, 0, x));
    EXPECT_FALSE(in_identified_region(s, -300, x));
}

TEST(Support, JobChoiceExperimentContainsMedianScenario) {
    const SupportSpec s = SupportSpec::job_choice_experiment();
    Scenario x;
    x.wage_pub = 750;
    x.wage_priv = 750;
    x.layoff_priv = 0.20;
    EXPECT_TRUE(s.contains(x));
    x.wage_priv = 250;
    EXPECT_FALSE(s.contains(x));
}

TEST(Attributes, ParseAndShift) {
    EXPECT_EQ(parse_attribute("layoff_pub"), Attribute::layoff_pub);
    EXPECT_THROW(parse_attribute("salary"), DatasetError);
    Scenario x;
    shift_attribute(x, Attribute::layoff_pub, 0.1);
    EXPECT_NEAR(x.layoff_pub, 0.15, 1e-15);
    shift_attribute(x, Attribute::employer_pub, 1.0);
    EXPECT_EQ(x.employer_pub, PublicEmployer::public_firm);
    EXPECT_DOUBLE_EQ(attribute_value(x, Attribute::employer_pub), 1.0);
}
