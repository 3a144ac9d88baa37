#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

struct RunResult {
    int code;
    std::string out;
};

// Build system pins the CLI path; the environment variable wins when set so
// the suite can be pointed at an installed binary.
const char* binary() {
    if (const char* bin = std::getenv("TREESCAPE_BIN"))
        return bin;
    return TREESCAPE_BIN;
}

// Runs the CLI with `args`, returning the exit code and captured stdout.
// stderr goes to `err_path` when given, /dev/null otherwise.
RunResult run(const std::string& args, const std::string& err_path = "") {
    std::string cmd = std::string(binary()) + " " + args + " 2>" +
                      (err_path.empty() ? "/dev/null" : err_path);
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    size_t got;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0)
        out.append(buf, got);
    int status = pclose(pipe);
    REQUIRE(WIFEXITED(status));
    return {WEXITSTATUS(status), out};
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    REQUIRE(out.good());
    out << text;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json parse_report(const std::string& text) {
    auto js = nlohmann::json::parse(text);
    CHECK(js["schema"] == 1);
    return js;
}

} // namespace

TEST_CASE("params subcommands print exact rationals") {
    auto mink = run("params mink --C 1");
    CHECK(mink.code == 0);
    CHECK(mink.out == "6\n");
    CHECK(run("params mink --C 2").out == "7\n");

    auto beta = run("params beta --C 1 --k 6");
    CHECK(beta.code == 0);
    CHECK(beta.out == "210777909/134217728 ~= 1.570418\n");

    auto eps = run("params eps --C 2");
    CHECK(eps.code == 0);
    CHECK(eps.out == "eps = 1/128 ~= 0.007812\n"
                     "reference = 1/128 ~= 0.007812\n"
                     "meets_reference = true\n");

    CHECK(run("params beta --C 1 --k 5").code == 2); // NotCertified
    CHECK(run("params mink").code == 2);             // --C is required
    CHECK(run("params mink --C nope").code == 2);
    CHECK(run("frobnicate").code == 2);
    CHECK(run("--help").code == 0);
}

TEST_CASE("miller generation round-trips and rejects hopeless families") {
    const std::string factors = "/tmp/escape_cli_factors.txt";
    const std::string word = "/tmp/escape_cli_miller.txt";
    write_file(factors, "# one forbidden cube\n0,0,0\n");

    auto gen = run("gen miller --factors " + factors +
                   " --beta 3/2 --length 30 --output " + word);
    REQUIRE(gen.code == 0);
    std::string golden;
    for (int i = 0; i < 30; ++i)
        golden += (i % 2 == 0) ? "0 " : "1 ";
    golden.back() = '\n';
    CHECK(read_file(word) == golden);

    auto ver = run("verify miller --factors " + factors + " --input " + word);
    CHECK(ver.code == 0);
    CHECK(parse_report(ver.out)["ok"] == true);

    // stdout and stdin plumbing agree with --output/--input files.
    auto piped = run("gen miller --factors " + factors +
                     " --beta 3/2 --length 30");
    CHECK(piped.out == golden);
    auto ver2 = run("verify miller --factors " + factors + " --input - < " +
                    word);
    CHECK(ver2.code == 0);

    // A violating word: the verifier exits 1 and lists hits.
    write_file(word, "0 0 0 1\n");
    auto bad = run("verify miller --factors " + factors + " --input " + word);
    CHECK(bad.code == 1);
    auto js = parse_report(bad.out);
    CHECK(js["ok"] == false);
    CHECK(js["violations"][0]["position"] == 0);
    CHECK(js["violations"][0]["factor_index"] == 0);

    // Forbidding both letters of a binary alphabet cannot be certified.
    write_file(factors, "0\n1\n");
    CHECK(run("gen miller --factors " + factors +
              " --beta 3/2 --length 5").code == 2);

    std::remove(factors.c_str());
    std::remove(word.c_str());
}

TEST_CASE("squarefree generation is reproducible and verifiable") {
    const std::string a = "/tmp/escape_cli_sf_a.txt";
    const std::string b = "/tmp/escape_cli_sf_b.txt";
    auto first = run("gen squarefree --lists random:42,21 --length 60 "
                     "--output " + a);
    REQUIRE(first.code == 0);
    auto second = run("gen squarefree --lists random:42,21 --length 60 "
                      "--output " + b);
    REQUIRE(second.code == 0);
    CHECK(read_file(a) == read_file(b));

    CHECK(run("verify squarefree --input " + a).code == 0);

    // A static list file drives the same pipeline.
    const std::string lists = "/tmp/escape_cli_lists.txt";
    std::string rows;
    for (int i = 0; i < 8; ++i)
        rows += "0,1,2,3\n";
    write_file(lists, rows);
    auto stat = run("gen squarefree --lists " + lists + " --length 8");
    CHECK(stat.code == 0);
    CHECK(stat.out.substr(0, 8) == "0 1 0 2 ");

    auto hot = run("verify squarefree --word hotshots");
    CHECK(hot.code == 1);
    auto js = parse_report(hot.out);
    CHECK(js["ok"] == false);
    CHECK(js["violations"][0]["start"] == 0);
    CHECK(js["violations"][0]["half_len"] == 4);

    CHECK(run("gen squarefree --lists random:bogus --length 4").code == 2);

    std::remove(a.c_str());
    std::remove(b.c_str());
    std::remove(lists.c_str());
}

TEST_CASE("beck generation round-trips under both N spellings") {
    const std::string bits = "/tmp/escape_cli_beck.txt";
    auto gen = run("gen beck --c 3/2 --beta 7/4 --N auto --length 150 "
                   "--output " + bits);
    REQUIRE(gen.code == 0);
    CHECK(read_file(bits).size() == 151); // bits plus newline

    CHECK(run("verify beck --c 3/2 --N 26 --input " + bits).code == 0);
    CHECK(run("verify beck --c 3/2 --N auto --beta 7/4 --input " + bits)
              .code == 0);
    CHECK(run("verify beck --c 3/2 --N auto --input " + bits).code == 2);

    write_file(bits, "0101\n");
    auto bad = run("verify beck --c 3/2 --N 1 --input " + bits);
    CHECK(bad.code == 1);
    auto js = parse_report(bad.out);
    CHECK(js["violations"][0]["i"] == 0);
    CHECK(js["violations"][0]["j"] == 2);
    CHECK(js["violations"][0]["n"] == 2);

    CHECK(run("gen beck --c 2 --beta 7/4 --N auto --length 4").code == 2);
    std::remove(bits.c_str());
}

TEST_CASE("blocks generation round-trips") {
    const std::string bits = "/tmp/escape_cli_blocks.txt";
    auto gen = run("gen blocks --epsilon 1/4 --beta 15/8 --N auto "
                   "--length 120 --output " + bits);
    REQUIRE(gen.code == 0);
    CHECK(run("verify blocks --epsilon 1/4 --N 46 --input " + bits).code == 0);
    CHECK(run("verify blocks --epsilon 1/4 --N auto --beta 15/8 --input " +
              bits).code == 0);

    write_file(bits, "0000\n");
    auto bad = run("verify blocks --epsilon 1/4 --N 2 --input " + bits);
    CHECK(bad.code == 1);
    auto js = parse_report(bad.out);
    CHECK(js["violations"][0]["i"] == 0);
    CHECK(js["violations"][0]["n"] == 2);

    CHECK(run("gen blocks --epsilon 1/100 --beta 15/8 --N auto --length 4")
              .code == 2);
    std::remove(bits.c_str());
}

TEST_CASE("dioph generation round-trips across denominator sources") {
    const std::string bits = "/tmp/escape_cli_dioph.txt";
    auto gen = run("gen dioph --denoms pow2 --k 6 --beta auto --bits 64 "
                   "--output " + bits);
    REQUIRE(gen.code == 0);
    CHECK(run("verify dioph --denoms pow2 --k 6 --input " + bits).code == 0);

    auto again = run("gen dioph --denoms pow2 --k 6 --beta auto --bits 64");
    CHECK(again.out == read_file(bits));

    const std::string denoms = "/tmp/escape_cli_T1.txt";
    write_file(denoms, "1\n");
    auto one = run("gen dioph --denoms file:" + denoms +
                   " --k 6 --beta 3/2 --bits 12");
    CHECK(one.out == "000010000000\n");

    write_file(bits, "00000\n");
    auto bad = run("verify dioph --denoms file:" + denoms + " --k 6 --input " +
                   bits);
    CHECK(bad.code == 1);
    auto js = parse_report(bad.out);
    CHECK(js["violations"][0]["t"] == 1);
    CHECK(js["violations"][0]["center_num"] == 0);
    CHECK(js["violations"][0]["center_den"] == 1);

    // Fibonacci needs C=2: k=7 with a certified beta.
    CHECK(run("gen dioph --denoms fib --k 7 --beta 5/3 --bits 48 --output " +
              bits).code == 0);
    CHECK(run("verify dioph --denoms fib --k 7 --input " + bits).code == 0);

    std::remove(bits.c_str());
    std::remove(denoms.c_str());
}

TEST_CASE("transcript lines land on standard error") {
    const std::string errs = "/tmp/escape_cli_transcript.txt";
    const std::string factors = "/tmp/escape_cli_tfac.txt";
    write_file(factors, "0,0,0\n");
    auto gen = run("gen miller --factors " + factors +
                   " --beta 3/2 --length 6 --transcript", errs);
    CHECK(gen.code == 0);
    auto log = read_file(errs);
    CHECK(log.find("step 0: forbid") != std::string::npos);
    CHECK(gen.out.find("step") == std::string::npos);
    std::remove(errs.c_str());
    std::remove(factors.c_str());
}
