#include "support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace qg;
using namespace qgt;

namespace {

namespace fs = std::filesystem;

const std::vector<std::string> fixtures{"circle", "cube",  "disconnected", "figure8", "interval",          "k33",
                                        "k4",     "k4_random", "k5",       "prism",   "star3",             "theta",
                                        "three_block_chain", "two_block_chain", "wheel4", "wheel5"};

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "qgraph_cli_io";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct Run {
    int status;
    std::string out;
};

// Runs the CLI with stdout captured in a file and stderr discarded.
Run run(const std::string& args, const std::string& tag) {
    const auto out = scratch(tag + ".out");
    const std::string cmd = std::string(QGRAPH_CLI) + " " + args + " > " + out.string() + " 2> /dev/null";
    const int raw = std::system(cmd.c_str());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(out)};
}

template <class T>
MetricGraph<T> parse(const std::string& text, bool allow2 = false) {
    std::istringstream in(text);
    return parse_graph<T>(in, allow2);
}

}  // namespace

TEST(GraphFormat, RoundTripOnFixtures) {
    for (const auto& name : fixtures) {
        const auto g = load<Rational>(name, true);
        const auto text = graph_text(g);
        const auto h = parse<Rational>(text, true);
        EXPECT_EQ(graph_text(h), text) << name;
        EXPECT_TRUE(isomorphic(g, h, true)) << name;
        const auto d = load<double>(name, true);
        EXPECT_TRUE(isomorphic(d, parse<double>(graph_text(d), true), true)) << name;
    }
}

TEST(GraphFormat, RationalLengthsStayExact) {
    const auto g = load<Rational>("theta", true);
    ASSERT_EQ(g.edge_count(), 3);
    EXPECT_EQ(g.edge(0).length, Rational(1, 2));
    EXPECT_EQ(g.edge(1).length, Rational(2, 3));
    EXPECT_EQ(g.edge(2).length, Rational(3, 4));
    EXPECT_NE(graph_text(g).find("edge e1 a b 2/3"), std::string::npos);
}

TEST(GraphFormat, Rejections) {
    const std::string head = "vertex a\nvertex b\n";
    EXPECT_THROW(parse<double>(head + "edge 1 a b -1\n", true), DomainError);
    EXPECT_THROW(parse<double>(head + "edge 1 a b 0\n", true), DomainError);
    EXPECT_THROW(parse<double>(head + "edge 1 a c 1\n", true), DomainError);
    EXPECT_THROW(parse<double>(head + "edge 1 a b 1\nedge 1 a b 2\n", true), DomainError);
    EXPECT_THROW(parse<double>(head + "edge 1 a b\n", true), DomainError);
    EXPECT_THROW(parse<double>(head + "loop 1 a\n", true), DomainError);
    EXPECT_THROW(parse<Rational>(head + "edge 1 a b 1/0\n", true), DomainError);
    // two degree-one vertices pass, a degree-two vertex needs the flag
    EXPECT_NO_THROW(parse<double>(head + "edge 1 a b 1\n"));
    const std::string path = head + "vertex c\nedge 1 a b 1\nedge 2 b c 1\n";
    EXPECT_THROW(parse<double>(path), DomainError);
    EXPECT_NO_THROW(parse<double>(path, true));
    try {
        parse<double>(head + "\n# comment\nedge 1 a c 1\n", true);
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_EQ(std::string(e.what()).rfind("line 5", 0), 0u) << e.what();
    }
}

TEST(Tables, RoundTrip) {
    const TableData t{{"a", "b", "c"}, {{"1", "x y", ""}, {"-2.5", "", "z"}}};
    std::ostringstream os;
    emit_table(t, os);
    EXPECT_EQ(os.str(), "a\tb\tc\n1\tx y\t\n-2.5\t\tz\n");
    std::istringstream is(os.str());
    const auto back = read_table(is);
    EXPECT_EQ(back.header, t.header);
    EXPECT_EQ(back.rows, t.rows);

    const TableData empty{{"k", "multiplicity"}, {}};
    std::ostringstream eo;
    emit_table(empty, eo);
    EXPECT_EQ(eo.str(), "k\tmultiplicity\n");
    std::istringstream ei(eo.str());
    EXPECT_TRUE(read_table(ei).rows.empty());

    std::ostringstream bad;
    EXPECT_THROW(emit_table(TableData{{"a"}, {{"1", "2"}}}, bad), DomainError);
    std::istringstream ragged("a\tb\n1\n");
    EXPECT_THROW(read_table(ragged), DomainError);
}

TEST(Tables, ClassFormat) {
    EXPECT_EQ(format_class({1, -2, 0}), "1 -2 0");
    EXPECT_EQ(parse_class("1 -2 0"), (HomologyClass{1, -2, 0}));
    EXPECT_TRUE(parse_class("").empty());
    EXPECT_THROW(parse_class("1 x"), DomainError);
    EXPECT_THROW(parse_class("1.5"), DomainError);
}

TEST(FrequencyTableFile, RoundTrip) {
    PrecisionScope scope(60);
    for (const std::string name : {"theta", "figure8", "k4_random"}) {
        const auto g = load<Rational>(name, true);
        const auto t = oracle_table(g, g.total_length());
        std::ostringstream os;
        write_frequency_table(t, os);
        std::istringstream is(os.str());
        const auto back = read_frequency_table<Rational>(is);
        EXPECT_EQ(back.rank, t.rank) << name;
        EXPECT_EQ(back.lmax, t.lmax) << name;
        EXPECT_EQ(back.generic, t.generic) << name;
        ASSERT_EQ(back.basis.size(), t.basis.size()) << name;
        ASSERT_EQ(back.entries.size(), t.entries.size()) << name;
        for (const auto& e : t.entries) {
            const auto* f = back.find(e.coordinates);
            ASSERT_NE(f, nullptr) << name << " (" << format_class(e.coordinates) << ")";
            EXPECT_EQ(f->length, e.length);
            EXPECT_LT(abs(f->frequency - e.frequency), mp_float("1e-38") * (1 + e.frequency));
        }
    }
    std::istringstream missing("coordinates\tfrequency\tlength\n");
    EXPECT_THROW(read_frequency_table<double>(missing), DomainError);
    std::istringstream wrong_rank("# rank 2\n# lmax 3\ncoordinates\tfrequency\tlength\n1\t1.4\t2\n");
    EXPECT_THROW(read_frequency_table<double>(wrong_rank), DomainError);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run("", "none").status, 2);
    EXPECT_EQ(run("spectrum", "nograph").status, 2);
    EXPECT_EQ(run("spectrum " + scratch("absent.qg").string(), "absent").status, 2);
    EXPECT_EQ(run("spectrum " + fixture("k4") + " --kmax -1", "negk").status, 2);
    EXPECT_EQ(run("recover " + fixture("k4") + " --method guess", "method").status, 2);

    const auto bad = scratch("bad.qg");
    std::ofstream(bad) << "vertex a\nvertex b\nedge 1 a b -1\n";
    EXPECT_EQ(run("spectrum " + bad.string(), "badlen").status, 1);
    EXPECT_EQ(run("validate " + bad.string(), "badvalid").status, 1);
    EXPECT_EQ(run("spectrum " + fixture("circle"), "deg2").status, 1);
    EXPECT_EQ(run("spectrum " + fixture("k4") + " --flux 1,2", "fluxrank").status, 1);

    const auto ok = run("validate " + fixture("k4"), "valid");
    EXPECT_EQ(ok.status, 0);
    EXPECT_NE(ok.out.find("first betti number: 3"), std::string::npos);
    EXPECT_NE(ok.out.find("valid"), std::string::npos);
}

TEST(Cli, SpectrumOfInterval) {
    // unit interval: k = n pi, so pi, ..., 3 pi below 10 plus k = 0
    const auto r = run("--allow-degree-two spectrum " + fixture("interval") + " --kmax 10", "interval");
    ASSERT_EQ(r.status, 0);
    std::istringstream is(r.out);
    const auto t = read_table(is);
    EXPECT_EQ(t.header, (std::vector<std::string>{"k", "multiplicity"}));
    const double len = static_cast<double>(load<double>("interval", true).total_length());
    const int expect = static_cast<int>(std::floor(10 * len / std::numbers::pi)) + 1;
    ASSERT_EQ(static_cast<int>(t.rows.size()), expect);
    for (int n = 0; n < expect; ++n) EXPECT_NEAR(parse_double(t.rows[n][0]), n * std::numbers::pi / len, 1e-8);
}

TEST(Cli, RoundTripIsExactInRationalMode) {
    const auto r = run("--rational roundtrip " + fixture("k4") + " --seed 7", "roundtrip");
    EXPECT_EQ(r.status, 0);
    EXPECT_NE(r.out.find("summary: isomorphic, max error 0"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("check planarity: yes"), std::string::npos);
}

TEST(Cli, RecoverThenReconstruct) {
    const auto table = scratch("theta.tsv");
    const auto rec = run("--rational --allow-degree-two recover " + fixture("theta") + " --lmax 4 -o " + table.string(), "recover");
    ASSERT_EQ(rec.status, 0);
    const auto t = read_frequency_table<Rational>(table.string());
    EXPECT_EQ(t.rank, 2);
    const auto graph = scratch("theta_back.qg");
    const auto back = run("--rational reconstruct --table " + table.string() + " -o " + graph.string(), "reconstruct");
    ASSERT_EQ(back.status, 0) << back.out;
    EXPECT_NE(back.out.find("planar: yes"), std::string::npos);
    const auto g = read_graph<Rational>(graph.string(), true);
    EXPECT_TRUE(isomorphic(g, load<Rational>("theta", true), true));
}

TEST(Cli, SameSeedSameBytes) {
    const std::string args = "--rational roundtrip " + fixture("prism") + " --seed 11";
    const auto a = run(args, "seed_a"), b = run(args, "seed_b");
    EXPECT_EQ(a.status, 0);
    EXPECT_EQ(a.out, b.out);
    const std::string sig = "signals " + fixture("k4_random") + " --lmax 4 --samples 7";
    EXPECT_EQ(run(sig, "sig_a").out, run(sig, "sig_b").out);
}
