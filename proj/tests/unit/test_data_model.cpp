#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "formulab/data_model.hpp"
#include "formulab/errors.hpp"
#include "formulab/random.hpp"
#include "formulab/synthgen.hpp"

using namespace formulab;

namespace {

DatasetSchema film_schema() {
    DatasetSchema s;
    s.group_column = "api";
    s.features = {{"polymer", ColumnKind::categorical},
                  {"plasticizer", ColumnKind::categorical},
                  {"thickness", ColumnKind::numeric},
                  {"weight", ColumnKind::numeric}};
    s.targets = {"disintegration_time"};
    s.task_kind = TaskKind::ofdf_like;
    return s;
}

const char* kFilmCsv =
    "record_id,api,polymer,plasticizer,thickness,weight,disintegration_time\n"
    "F1,A,HPMC,PEG,2,10,30\n"
    "F2,A,PVA,,4,12,45.5\n"
    "F3,B,HPMC,glycerol,6,11,60\n";

Dataset film() {
    std::istringstream in(kFilmCsv);
    return parse_csv(in, film_schema());
}

}  // namespace

TEST_CASE("load_csv: three-row file") {
    const auto ds = film();
    CHECK(ds.size() == 3);
    CHECK(ds.features().rows() == 3);
    CHECK(ds.features().cols() == 4);
    CHECK(ds.record(1).record_id == "F2");
    CHECK(ds.record(1).targets == std::vector<double>{45.5});
    CHECK(ds.group_index().at("A") == std::vector<std::size_t>{0, 1});
    CHECK(ds.group_index().at("B") == std::vector<std::size_t>{2});
    CHECK(ds.index_of("F3") == std::optional<std::size_t>{2});
    CHECK_FALSE(ds.index_of("F9").has_value());
    CHECK(ds.feature_names() == std::vector<std::string>{"polymer", "plasticizer", "thickness", "weight"});
}

TEST_CASE("load_csv: header lacking the group column") {
    std::istringstream in("record_id,polymer,plasticizer,thickness,weight,disintegration_time\n"
                          "F1,HPMC,PEG,2,10,30\n");
    try {
        parse_csv(in, film_schema());
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find("api") != std::string::npos);
    }
}

TEST_CASE("load_csv: non-numeric token reports the row number") {
    std::istringstream in("record_id,api,polymer,plasticizer,thickness,weight,disintegration_time\n"
                          "F1,A,HPMC,PEG,2,10,30\n"
                          "F2,A,HPMC,PEG,thick,10,30\n");
    try {
        parse_csv(in, film_schema());
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.row() == 2);  // data rows count from 1 after the header
    }
}

TEST_CASE("load_csv: duplicate ids, missing cells, bad targets") {
    {
        std::istringstream in("record_id,api,polymer,plasticizer,thickness,weight,disintegration_time\n"
                              "F1,A,HPMC,PEG,2,10,30\nF1,A,HPMC,PEG,3,10,30\n");
        CHECK_THROWS_AS(parse_csv(in, film_schema()), IntegrityError);
    }
    {
        std::istringstream in("record_id,api,polymer,plasticizer,thickness,weight,disintegration_time\n"
                              "F1,A,HPMC,PEG,,10,30\n");
        CHECK_THROWS(parse_csv(in, film_schema()));
    }
    {
        std::istringstream in("record_id,api,polymer,plasticizer,thickness,weight,disintegration_time\n"
                              "F1,A,HPMC,PEG,2,10,250\n");
        CHECK_THROWS_AS(parse_csv(in, film_schema()), IntegrityError);
    }
    {
        std::istringstream in("record_id,api,polymer,plasticizer,thickness,weight,disintegration_time\n"
                              "F1,A,HPMC,PEG,2,10,-1\n");
        CHECK_THROWS_AS(parse_csv(in, film_schema()), IntegrityError);
    }
}

TEST_CASE("load_csv: quoted fields, BOM, CRLF and extra columns") {
    std::istringstream in("\xEF\xBB\xBFrecord_id,api,polymer,plasticizer,thickness,weight,note,disintegration_time\r\n"
                          "F1,A,\"HPMC, E5\",PEG,2,10,\"said \"\"hi\"\"\",30\r\n");
    const auto ds = parse_csv(in, film_schema());
    CHECK(ds.size() == 1);
    CHECK(ds.record(0).categoricals.at("polymer") == "HPMC, E5");
}

TEST_CASE("load_csv: targets optional at prediction time") {
    std::istringstream in("record_id,api,polymer,plasticizer,thickness,weight\n"
                          "F1,A,HPMC,PEG,2,10\n");
    const auto ds = parse_csv(in, film_schema(), Dataset::Targets::optional);
    CHECK(ds.size() == 1);
    CHECK_FALSE(ds.has_targets());
    std::istringstream again("record_id,api,polymer,plasticizer,thickness,weight\nF1,A,HPMC,PEG,2,10\n");
    CHECK_THROWS_AS(parse_csv(again, film_schema()), SchemaError);
}

TEST_CASE("load_csv: missing file") {
    CHECK_THROWS(load_csv("/nonexistent/formulab/none.csv", film_schema()));
}

TEST_CASE("load_csv: 131-row OFDF-shaped file") {
    const auto corpus = synthgen::generate(TaskKind::ofdf_like, synthgen::ofdf_corpus_config(3));
    const auto path = std::filesystem::temp_directory_path() / "formulab_ofdf131.csv";
    save_csv(path, corpus);
    const auto loaded = load_csv(path, corpus.schema());
    CHECK(loaded.size() == 131);
    CHECK(loaded.group_index().size() == 13);
    std::filesystem::remove(path);
}

TEST_CASE("encode_categoricals: sorted codes, empty label 0, independent columns") {
    const auto ds = film();
    const auto& polymer = ds.encoder().table("polymer");
    CHECK(polymer.labels == std::vector<std::string>{"HPMC", "PVA"});
    CHECK(polymer.code("HPMC") == 1);
    CHECK(polymer.code("PVA") == 2);
    CHECK(polymer.code("") == 0);
    CHECK(ds.features().column(0) == std::vector<double>{1, 2, 1});
    // plasticizer: {"", "PEG", "glycerol"} -> PEG 1, glycerol 2, empty 0
    CHECK(ds.features().column(1) == std::vector<double>{1, 0, 2});
    CHECK(ds.encoder().table("plasticizer").code("PEG") == 1);

    try {
        polymer.code("Pullulan");
        FAIL("expected UnknownCategoryError");
    } catch (const UnknownCategoryError& e) {
        CHECK(std::string(e.what()).find("Pullulan") != std::string::npos);
        CHECK(e.label() == "Pullulan");
    }
}

TEST_CASE("encode_categoricals: stored table reused at prediction time") {
    const auto ds = film();
    std::istringstream in("record_id,api,polymer,plasticizer,thickness,weight\n"
                          "P1,C,PVA,glycerol,1,1\n");
    const auto fresh = parse_csv(in, film_schema(), Dataset::Targets::optional);
    const auto reencoded = encode_categoricals(fresh, ds.encoder());
    CHECK(reencoded.features()(0, 0) == 2.0);
    CHECK(reencoded.features()(0, 1) == 2.0);

    std::istringstream bad("record_id,api,polymer,plasticizer,thickness,weight\n"
                           "P1,C,Pullulan,glycerol,1,1\n");
    const auto unseen = parse_csv(bad, film_schema(), Dataset::Targets::optional);
    CHECK_THROWS_AS(encode_categoricals(unseen, ds.encoder()), UnknownCategoryError);
}

TEST_CASE("encode_categoricals: independent of row order") {
    auto ds = film();
    auto records = ds.records();
    std::reverse(records.begin(), records.end());
    const auto reversed = Dataset::build(film_schema(), records);
    CHECK(reversed.encoder() == ds.encoder());
    CHECK(encode_categoricals(reversed).encoder() == ds.encoder());
}

TEST_CASE("one-hot toggle") {
    auto schema = film_schema();
    schema.one_hot = true;
    std::istringstream in(kFilmCsv);
    const auto ds = parse_csv(in, schema);
    CHECK(ds.feature_names() ==
          std::vector<std::string>{"polymer=HPMC", "polymer=PVA", "plasticizer=PEG", "plasticizer=glycerol", "thickness",
                                   "weight"});
    CHECK(ds.features().row(1)[0] == 0.0);
    CHECK(ds.features().row(1)[1] == 1.0);
    CHECK(ds.features().row(1)[2] == 0.0);
    CHECK(ds.features().row(1)[3] == 0.0);
}

TEST_CASE("fit_scaling and apply_scaling examples") {
    const auto ds = film();
    const std::vector<std::size_t> all{0, 1, 2};
    const auto p = fit_scaling(ds, all);
    CHECK(p.features[2].min == 2.0);
    CHECK(p.features[2].max == 6.0);
    CHECK(p.targets[0].min == 30.0);
    CHECK(p.targets[0].max == 60.0);

    const ColumnRange r{"x", 2.0, 6.0};
    CHECK(r.scale(4.0) == 0.5);
    CHECK(r.invert(0.5) == 4.0);
    CHECK(r.scale(8.0) == 1.5);

    const ColumnRange c{"c", 5.0, 5.0};
    CHECK(c.constant());
    CHECK(c.scale(5.0) == 0.0);

    const auto scaled = apply_scaling(ds, p);
    CHECK(scaled.features()(1, 2) == 0.5);
    CHECK(scaled.scaling().has_value());
    CHECK(scaled.targets()(1, 0) == doctest::Approx(15.5 / 30.0).epsilon(1e-15));

    CHECK_THROWS_AS(fit_scaling(ds, std::vector<std::size_t>{}), ArgumentError);
    CHECK_THROWS_AS(fit_scaling(ds, std::vector<std::size_t>{3}), ArgumentError);
}

TEST_CASE("fit_scaling: constant column and no clipping outside the training range") {
    const auto ds = film();
    const auto p = fit_scaling(ds, std::vector<std::size_t>{0});
    for (const auto& r : p.features) CHECK(r.constant());
    const auto p2 = fit_scaling(ds, std::vector<std::size_t>{0, 1});
    const auto scaled = apply_scaling(ds, p2);
    CHECK(scaled.features()(2, 2) == 2.0);  // 6 on (2, 4)
}

TEST_CASE("apply_scaling: column mismatch") {
    const auto ds = film();
    auto p = fit_scaling(ds, std::vector<std::size_t>{0, 1, 2});
    p.features[0].name = "other";
    CHECK_THROWS_AS(apply_scaling(ds, p), SchemaError);
    auto q = fit_scaling(ds, std::vector<std::size_t>{0, 1, 2});
    q.features.pop_back();
    CHECK_THROWS_AS(apply_scaling(ds, q), SchemaError);
}

TEST_CASE("SRMT targets use the fixed (0, 100) range") {
    const auto ds = synthgen::generate(TaskKind::srmt_like, {20, {10, 10}, 3.0, 1});
    const auto p = fit_scaling(ds, std::vector<std::size_t>{0, 1});
    REQUIRE(p.targets.size() == 4);
    for (const auto& t : p.targets) {
        CHECK(t.min == 0.0);
        CHECK(t.max == 100.0);
    }
}

TEST_CASE("scaling round trip within 1e-12 relative error") {
    const auto ds = synthgen::generate(TaskKind::ofdf_like, synthgen::ofdf_corpus_config(11));
    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < ds.size(); i += 2) train.push_back(i);
    const auto p = fit_scaling(ds, train);
    const auto scaled = apply_scaling(ds, p);
    for (std::size_t c = 0; c < p.features.size(); ++c) {
        if (p.features[c].constant()) continue;
        for (std::size_t r = 0; r < ds.size(); ++r) {
            const double x = ds.features()(r, c);
            const double back = p.features[c].invert(scaled.features()(r, c));
            CHECK(std::abs(back - x) <= 1e-12 * std::max(1.0, std::abs(x)));
        }
    }
    const auto inv = invert_target_scaling(scaled.targets(), p);
    for (std::size_t r = 0; r < ds.size(); ++r)
        CHECK(std::abs(inv(r, 0) - ds.targets()(r, 0)) <= 1e-12 * std::max(1.0, std::abs(ds.targets()(r, 0))));
}

TEST_CASE("leakage guard: training-subset scaling ignores other rows") {
    const auto ds = synthgen::generate(TaskKind::ofdf_like, synthgen::ofdf_corpus_config(5));
    std::vector<std::size_t> train;
    std::vector<FormulationRecord> train_only;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (i % 3 == 0) continue;
        train.push_back(i);
        train_only.push_back(ds.record(i));
    }
    const auto full = fit_scaling(ds, train);
    const auto sub = Dataset::build(ds.schema(), train_only, ds.encoder());
    std::vector<std::size_t> all(sub.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    CHECK(fit_scaling(sub, all) == full);
}

TEST_CASE("csv load -> save -> load is idempotent") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto ds = synthgen::generate(TaskKind::srmt_like, synthgen::srmt_corpus_config(seed));
        std::ostringstream out;
        write_csv(out, ds.schema(), ds.records());
        std::istringstream in(out.str());
        const auto again = parse_csv(in, ds.schema());
        CHECK(again.records() == ds.records());
        CHECK(again.features() == ds.features());
        std::ostringstream out2;
        write_csv(out2, again.schema(), again.records());
        CHECK(out2.str() == out.str());
    }
}

TEST_CASE("format_double round-trips") {
    Rng rng(9);
    for (int i = 0; i < 1000; ++i) {
        const double v = rng.uniform(-1e6, 1e6) * std::pow(10.0, static_cast<double>(rng.below(20)) - 10.0);
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(30.0) == "30");
}

TEST_CASE("schema json round trip and validation") {
    auto s = film_schema();
    CHECK(schema_from_json(to_json(s)) == s);
    s.one_hot = true;
    s.id_column = "id";
    CHECK(schema_from_json(nlohmann::json::parse(to_json(s).dump())) == s);

    auto bad = film_schema();
    bad.targets = {"a", "b"};
    CHECK_THROWS_AS(bad.validate(), SchemaError);
    auto dup = film_schema();
    dup.features.push_back({"weight", ColumnKind::numeric});
    CHECK_THROWS_AS(dup.validate(), SchemaError);
    CHECK_THROWS_AS(schema_from_json(nlohmann::json::parse(R"({"features": 3})")), SchemaError);
    CHECK(parse_task_kind("srmt") == TaskKind::srmt_like);
    CHECK_THROWS(parse_task_kind("tablet"));
}

TEST_CASE("descriptor validation") {
    DescriptorSet d;
    d.values = {300.0, 1.5, 2, 4, 3, 80.0, 20, 350.0, -2.5};
    CHECK_NOTHROW(d.validate());
    d.values[2] = 1.5;
    CHECK_THROWS(d.validate());
    d.values[2] = -1;
    CHECK_THROWS(d.validate());
    d.values[2] = 2;
    d.values[0] = std::nan("");
    CHECK_THROWS(d.validate());
}

TEST_CASE("encoder and scaling json round trip") {
    const auto ds = film();
    CHECK(encoder_from_json(nlohmann::json::parse(to_json(ds.encoder()).dump())) == ds.encoder());
    const auto p = fit_scaling(ds, std::vector<std::size_t>{0, 2});
    CHECK(scaling_from_json(nlohmann::json::parse(to_json(p).dump())) == p);
}
