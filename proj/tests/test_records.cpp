#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "chernstat/chern.hpp"
#include "chernstat/harness.hpp"
#include "chernstat/records.hpp"

using namespace chernstat;

namespace {

EnsembleRecord sample_record()
{
    EnsembleRecord r;
    r.spec = CorrelationSpec::lorentzian(0.37);
    r.dim = 3;
    r.seed = 0xfedcba9876543210ULL;
    r.config_index = 2;
    r.index = 41;
    r.band = {1, -3, 2};
    r.gap = {0, 1, -2, 0};
    r.mean_energy = {-1.25, 0.1 / 3.0, 1.7};
    r.density = {0.5, 0.75, 0.5};
    r.sigma2 = sensitivity(r.spec);
    r.velocity_variance = level_velocity_variance(r.spec);
    r.max_residual = 1.5e-15;
    r.timings = {120, 100, 196, 4, 7, {0, 0, 0, 150, 46}};
    return r;
}

}  // namespace

TEST_SUITE("records")
{
    TEST_CASE("JSON line round trip is exact")
    {
        const auto r = sample_record();
        const auto line = to_json_line(r);
        CHECK(line.find('\n') == std::string::npos);
        CHECK(parse_record(line) == r);
        CHECK(to_json_line(parse_record(line)) == line);
    }

    TEST_CASE("record carries the documented fields")
    {
        const auto line = to_json_line(sample_record());
        for (const char* key : {"\"family\"", "\"scale\"", "\"M\"", "\"seed\"", "\"N\"", "\"G\"", "\"mean_E\"",
                                "\"rho\"", "\"sigma2\"", "\"unresolved\"", "\"timings\"", "\"checksum\""})
            CHECK(line.find(key) != std::string::npos);
    }

    TEST_CASE("tampering is detected")
    {
        auto line = to_json_line(sample_record());
        const auto pos = line.find("\"N\":[1");
        REQUIRE(pos != std::string::npos);
        line[pos + 5] = '2';
        CHECK_THROWS_AS(parse_record(line), RecordError);
        CHECK_THROWS_AS(parse_record("{\"M\": 3"), RecordError);
        CHECK_THROWS_AS(parse_record("[1,2]"), RecordError);
    }

    TEST_CASE("stored Chern vectors match regeneration from (spec, M, seed)")
    {
        EnsembleConfig e{CorrelationSpec::gaussian(0.9), 4, 1};
        const auto r = run_realization(e, RefinePolicy{}, 1234);
        const auto again = parse_record(to_json_line(r));
        const auto c = fhs_chern(sample_field(again.spec, again.dim, again.seed), RefinePolicy{});
        CHECK(c.result.band == again.band);
        CHECK(c.result.gap == again.gap);
    }

    TEST_CASE("files, blank lines and grouping")
    {
        const auto dir = std::filesystem::temp_directory_path() / "chernstat_records_test";
        std::filesystem::create_directories(dir);
        const auto path = dir / "r.jsonl";
        auto a = sample_record();
        auto b = sample_record();
        b.seed = 5;
        auto c = sample_record();
        c.spec.scale = 0.5;
        auto d = sample_record();
        d.unresolved = true;
        d.seed = 9;
        {
            std::ofstream out(path);
            out << to_json_line(a) << "\n\n" << to_json_line(b) << "\n" << to_json_line(c) << "\n"
                << to_json_line(d) << "\n";
        }
        const auto all = read_records(path);
        CHECK(all.size() == 4);
        const auto groups = group_records(all);
        REQUIRE(groups.size() == 2);
        CHECK(groups[0].key.scale == doctest::Approx(0.37));
        CHECK(groups[0].records.size() == 2);
        CHECK(groups[0].records[0].seed == 5);  // sorted by seed
        CHECK(groups[0].excluded == 1);
        CHECK(groups[1].records.size() == 1);

        {
            std::ofstream out(path, std::ios::app);
            out << "{broken\n";
        }
        try {
            (void)read_records(path);
            FAIL("expected RecordError");
        } catch (const RecordError& e) {
            CHECK(std::string(e.what()).find(":6:") != std::string::npos);
        }
        std::filesystem::remove_all(dir);
    }

    TEST_CASE("fnv1a64 reference values")
    {
        CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
        CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    }
}
