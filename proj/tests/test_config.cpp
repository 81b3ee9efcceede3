#include "colearn/config.hpp"

#include "colearn/error.hpp"

#include <doctest.h>

#include <cstdlib>
#include <sstream>

using namespace colearn;

TEST_CASE("an empty config is the documented default run") {
    std::stringstream empty;
    const auto config = parse_config(empty);
    CHECK(config.dataset == "synthetic");
    CHECK(config.window_length == 100);
    CHECK(config.batch_size == 64);
    CHECK(config.conv_out_channels == 64);
    CHECK(config.conv_kernel == 3);
    CHECK(config.pool_kernel == 2);
    CHECK(config.adam_alpha == 0.001);
    CHECK(config.adam_beta1 == 0.9);
    CHECK(config.adam_beta2 == 0.999);
    CHECK(config.adam_epsilon == 1e-8);
    CHECK(config.topology == "full");
    CHECK(config.include_self);
    CHECK(config.mode == "collab");
    CHECK(config.split_ratio == 0.8);
}

TEST_CASE("unknown keys are rejected with the line number") {
    std::stringstream in("epochs = 5\nbogus_key = 1\n");
    try {
        parse_config(in, "test.cfg");
        FAIL("expected config_error");
    } catch (const config_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("bogus_key") != std::string::npos);
        CHECK(msg.find("test.cfg:2") != std::string::npos);
    }
}

TEST_CASE("type mismatches name the key") {
    std::stringstream in("epochs = soon\n");
    try {
        parse_config(in);
        FAIL("expected config_error");
    } catch (const config_error& e) {
        CHECK(std::string(e.what()).find("epochs") != std::string::npos);
    }
}

TEST_CASE("zero epochs fail validation") {
    std::stringstream in("epochs = 0\n");
    CHECK_THROWS_AS(parse_config(in), config_error);
}

TEST_CASE("duplicate keys are rejected") {
    std::stringstream in("epochs = 1\nepochs = 2\n");
    CHECK_THROWS_AS(parse_config(in), config_error);
}

TEST_CASE("comments and blank lines are ignored") {
    std::stringstream in("# a comment\n\nepochs = 3  # trailing comment\n");
    CHECK(parse_config(in).epochs == 3);
}

TEST_CASE("the hash is stable across re-parses and key order") {
    std::stringstream a("epochs = 5\nseed = 9\n");
    std::stringstream b("seed = 9\nepochs = 5\n");
    const auto ca = parse_config(a);
    const auto cb = parse_config(b);
    CHECK(ca.hash() == cb.hash());

    std::stringstream c("epochs = 5\nseed = 10\n");
    CHECK(parse_config(c).hash() != ca.hash());
}

TEST_CASE("workers and output paths do not perturb the hash") {
    std::stringstream a("epochs = 5\nworkers = 1\nout_dir = x\n");
    std::stringstream b("epochs = 5\nworkers = 8\nout_dir = y\n");
    CHECK(parse_config(a).hash() == parse_config(b).hash());
}

TEST_CASE("the data-root environment variable is echoed into the hash") {
    RunConfig config;
    unsetenv("COLEARN_DATA_ROOT");
    const auto without = config.hash();
    setenv("COLEARN_DATA_ROOT", "/data/somewhere", 1);
    const auto with = config.hash();
    unsetenv("COLEARN_DATA_ROOT");
    CHECK(without != with);
    CHECK(config.canonical_text().find("data_dir=") != std::string::npos);
}

TEST_CASE("experiment ids embed dataset, scope, mode and hash") {
    RunConfig config;
    const auto id = config.experiment_id();
    CHECK(id.find("synthetic-global-collab-") == 0);
    CHECK(id.size() > std::string("synthetic-global-collab-").size());
}

TEST_CASE("overrides go through the same validation") {
    RunConfig config;
    apply_override(config, "epochs", "7");
    CHECK(config.epochs == 7);
    CHECK_THROWS_AS(apply_override(config, "not_a_key", "1"), config_error);
    CHECK_THROWS_AS(apply_override(config, "batch_size", "many"), config_error);
}

TEST_CASE("invalid enumerations fail validation") {
    for (const auto& [key, value] :
         std::vector<std::pair<std::string, std::string>>{{"dataset", "mnist"},
                                                          {"scope", "everywhere"},
                                                          {"mode", "turbo"}}) {
        RunConfig config;
        apply_override(config, key, value);
        CHECK_THROWS_AS(config.validate(), config_error);
    }
}

TEST_CASE("data fingerprint ignores training-only settings") {
    RunConfig a;
    RunConfig b = a;
    apply_override(b, "epochs", "99");
    apply_override(b, "adam_alpha", "0.5");
    CHECK(a.data_fingerprint() == b.data_fingerprint());
    CHECK(a.hash() != b.hash());

    RunConfig c = a;
    apply_override(c, "window_length", "50");
    CHECK(a.data_fingerprint() != c.data_fingerprint());
}
