#include <doctest.h>

#include <fstream>

#include "gave/config.hpp"
#include "gave/error.hpp"
#include "tmpdir.hpp"

using namespace gave;

TEST_CASE("defaults are a legal configuration") {
    const PipelineConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.llt.d_d == 768);
    CHECK(cfg.llt.grid_channels() == 256);
}

TEST_CASE("parse applies keys and re-derives d_d") {
    const PipelineConfig cfg = PipelineConfig::parse("# comment\n\nn_grid = 4\njbf.sigma_range=0.2  # trailing\nk=100\n");
    CHECK(cfg.llt.n_grid == 4);
    CHECK(cfg.llt.d_d == 1024);
    CHECK(cfg.jbf.sigma_range == 0.2);
    CHECK(cfg.llt.k == 100);
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("an explicit d_d is kept and checked") {
    const PipelineConfig cfg = PipelineConfig::parse("d_d=768\nn_grid=4\n");
    CHECK(cfg.llt.d_d == 768);
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("d_d / n_grid"), Error);
}

TEST_CASE("errors carry the line number") {
    CHECK_THROWS_WITH_AS(PipelineConfig::parse("k=1\nnot a setting\n"), doctest::Contains("line 2"), Error);
    CHECK_THROWS_WITH_AS(PipelineConfig::parse("k=1\n\nbogus=3\n"), doctest::Contains("line 3"), Error);
    CHECK_THROWS_WITH_AS(PipelineConfig::parse("k=ten\n"), doctest::Contains("line 1"), Error);
    CHECK_THROWS_AS(PipelineConfig::parse("k=-1\n"), Error);
    CHECK_THROWS_AS(PipelineConfig::parse("norm.scale=1.0x\n"), Error);
}

TEST_CASE("to_map round trips through parse") {
    PipelineConfig cfg;
    cfg.set("n_group", "8");
    cfg.set("align.inlier_tau", "0.037");
    cfg.set("loss.depth", "0.1");
    std::string text;
    for (const auto& [k, v] : cfg.to_map()) text += k + "=" + v + "\n";
    const PipelineConfig back = PipelineConfig::parse(text);
    CHECK(back.to_map() == cfg.to_map());
    CHECK(back.llt == cfg.llt);
}

TEST_CASE("load reads files") {
    TempDir dir;
    std::ofstream(dir.file("c.txt")) << "n_scales=3\n";
    CHECK(PipelineConfig::load(dir.file("c.txt")).llt.n_scales == 3);
    CHECK_THROWS_AS(PipelineConfig::load(dir.file("none.txt")), Error);
}

TEST_CASE("validation ranges") {
    PipelineConfig cfg;
    cfg.llt.n_scales = 4;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = PipelineConfig{};
    cfg.align.subset_size = 2;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = PipelineConfig{};
    cfg.jbf.sigma_spatial = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}
