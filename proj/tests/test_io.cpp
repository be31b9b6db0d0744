#include "akns/io.hpp"

#include <catch_amalgamated.hpp>

using namespace akns;

TEST_CASE("spectral JSON round trip keeps the tail policy") {
    auto d = SpectralData::unperturbed(3);
    d.lambda[4] += 0.1;
    auto j = io::to_json(SpectralData(d.lambda, d.mu, TailPolicy::asymptotic));
    auto back = io::spectral_from_json(io::parse_json(j.dump(), "mem"));
    CHECK(back.N == 3);
    CHECK(back.tail_policy == TailPolicy::asymptotic);
    CHECK(back.lambda == d.lambda);
    auto forced = io::spectral_from_json(j, "mem", TailPolicy::zero_remainder);
    CHECK(forced.tail_policy == TailPolicy::zero_remainder);
}

TEST_CASE("norming JSON without a tail policy defaults to zero remainders") {
    auto nd = io::norming_from_json(io::parse_json(R"({"lambda":[-3.14159,0,3.14159],"alpha":[1,1.1,1]})", "mem"));
    CHECK(nd.N == 1);
    CHECK(nd.tail_policy == TailPolicy::zero_remainder);
    CHECK(nd.alpha[1] == 1.1);
}

TEST_CASE("malformed JSON inputs raise I/O errors") {
    auto code = [](const std::string& text) {
        try {
            io::spectral_from_json(io::parse_json(text, "mem"), "mem");
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::solver;
    };
    CHECK(code("{") == ErrorCode::io);
    CHECK(code(R"({"lambda":[0]})") == ErrorCode::io);
    CHECK(code(R"({"lambda":[0,"a",1],"mu":[1,2,3]})") == ErrorCode::io);
    CHECK(code(R"({"N":2,"lambda":[0],"mu":[1]})") == ErrorCode::io);
    CHECK(code(R"({"lambda":[0,1],"mu":[1,2]})") == ErrorCode::io);  // even length
}

TEST_CASE("CSV potential parsing") {
    auto q = io::parse_potential_csv("x,q1,q3\n0,1,2\n0.5,3,4\n1,5,6\n");
    CHECK(q.m == 2);
    CHECK(q.q1[1] == 3);
    CHECK(q.q3[2] == 6);
    auto again = io::parse_potential_csv(io::potential_csv(q));
    CHECK(again.q1 == q.q1);
    CHECK(again.q3 == q.q3);
}

TEST_CASE("CSV errors name the offending line") {
    auto msg = [](const std::string& text) {
        try {
            io::parse_potential_csv(text, "pot.csv");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::io);
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(msg("x,q1,q3\n0,1,2\n0.5,abc,4\n1,5,6\n").find("pot.csv:3") != std::string::npos);
    CHECK(msg("x,q1,q3\n0,1,2\n0.5,1\n1,5,6\n").find("pot.csv:3") != std::string::npos);
    CHECK(msg("0,1,2\n0.5,1,2\n1,5,6,7\n").find("pot.csv:3") != std::string::npos);
    CHECK(msg("x,q1,q3\n0,1,2\n0.4,1,2\n1,5,6\n").find("uniform") != std::string::npos);
}

TEST_CASE("flat config") {
    auto kv = io::parse_config("# comment\nm = 128\n  N=16 # trailing\n\ntail = zero_remainder\n");
    CHECK(kv.at("m") == "128");
    CHECK(kv.at("N") == "16");
    CHECK(kv.at("tail") == "zero_remainder");
    CHECK_THROWS_AS(io::parse_config("m 128\n"), Error);
}

TEST_CASE("missing files are I/O errors") {
    try {
        io::read_text("/nonexistent/file.json");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::io);
        CHECK(e.exit_code() == 5);
    }
}
