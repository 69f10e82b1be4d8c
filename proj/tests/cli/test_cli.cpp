#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#ifndef PCQA_CLI_PATH
#error "PCQA_CLI_PATH must name the pcqa executable"
#endif

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

class Sandbox {
public:
    Sandbox() {
        static int counter = 0;
        dir_ = fs::temp_directory_path() / ("pcqa_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    ~Sandbox() { fs::remove_all(dir_); }

    fs::path path(const std::string& name) const { return dir_ / name; }
    std::string operator/(const std::string& name) const { return path(name).string(); }

    Run run(const std::string& args) const {
        const auto out = dir_ / "stdout.txt";
        const auto err = dir_ / "stderr.txt";
        const std::string cmd = "cd '" + dir_.string() + "' && '" PCQA_CLI_PATH "' " + args + " >'" + out.string() +
                                "' 2>'" + err.string() + "'";
        const int status = std::system(cmd.c_str());
        Run r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(out);
        r.err = slurp(err);
        return r;
    }

private:
    fs::path dir_;
};

std::string ply(const std::vector<std::array<int, 3>>& pts, bool color, int bit_depth) {
    std::string s = "ply\nformat ascii 1.0\ncomment bit_depth " + std::to_string(bit_depth) + "\nelement vertex " +
                    std::to_string(pts.size()) + "\nproperty float x\nproperty float y\nproperty float z\n";
    if (color) s += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    s += "end_header\n";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        s += std::to_string(pts[i][0]) + " " + std::to_string(pts[i][1]) + " " + std::to_string(pts[i][2]);
        if (color) s += " " + std::to_string(i * 37 % 256) + " " + std::to_string(i * 91 % 256) + " 128";
        s += "\n";
    }
    return s;
}

std::string random_ply(std::size_t n, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> d(0, 1023);
    std::vector<std::array<int, 3>> pts(n);
    for (auto& p : pts) p = {d(rng), d(rng), d(rng)};
    return ply(pts, true, 10);
}

std::string vote(const std::string& session, const std::string& choice) {
    return R"({"session":")" + session +
           R"(","group":{"codec":"gpcc","rate":"R1","content":"Soldier"},"left":"Soldier-gpcc_p1_r1","right":"Soldier-gpcc_p2_r1","choice":")" +
           choice + "\"}\n";
}

std::string fifteen_five() {
    std::string s;
    for (int k = 0; k < 20; ++k) s += vote("s" + std::to_string(k), k < 15 ? "left" : "right");
    return s;
}

// Field `col` of CSV line `line` (0-based).
std::string field(const std::string& text, int line, int col) {
    std::istringstream in(text);
    std::string l;
    for (int i = 0; i <= line; ++i) std::getline(in, l);
    std::istringstream ls(l);
    std::string f;
    for (int i = 0; i <= col; ++i) std::getline(ls, f, ',');
    return f;
}

}  // namespace

TEST_CASE("metric: identical files with an empty bitstream") {
    Sandbox box;
    write_file(box.path("a.ply"), random_ply(50, 1));
    write_file(box.path("empty.bin"), "");
    const auto r = box.run("metric a.ply a.ply empty.bin --codec gpcc --rate R1 --strategy P1");
    REQUIRE(r.code == 0);
    CHECK(r.out == "content,codec,rate,strategy,bpp,d1_psnr,d2_psnr,y_psnr,yuv_psnr\n"
                   "a,gpcc,R1,P1,0.000000,inf,inf,inf,inf\n");
}

TEST_CASE("metric: two-point D1 fixture lands in the d1 column") {
    Sandbox box;
    write_file(box.path("ref.ply"), ply({{0, 0, 0}, {2, 0, 0}}, false, 2));
    write_file(box.path("dec.ply"), ply({{1, 0, 0}}, false, 2));
    const auto r = box.run("metric ref.ply dec.ply");
    REQUIRE(r.code == 0);
    CHECK(std::stod(field(r.out, 1, 5)) == doctest::Approx(10.0 * std::log10(27.0)).epsilon(1e-6));
    CHECK(field(r.out, 1, 7) == "na");
}

TEST_CASE("metric: errors map to exit codes") {
    Sandbox box;
    write_file(box.path("c.ply"), random_ply(20, 2));
    write_file(box.path("g.ply"), ply({{1, 2, 3}, {4, 5, 6}}, false, 10));
    write_file(box.path("bad.ply"), "not a ply\n");

    auto r = box.run("metric c.ply g.ply --color");
    CHECK(r.code == 1);
    CHECK(r.err.find("color") != std::string::npos);

    r = box.run("metric c.ply nowhere.ply");
    CHECK(r.code == 2);
    CHECK(r.err.find("nowhere.ply") != std::string::npos);

    r = box.run("metric c.ply c.ply missing.bin");
    CHECK(r.code == 2);
    CHECK(r.err.find("missing.bin") != std::string::npos);

    r = box.run("metric c.ply bad.ply");
    CHECK(r.code == 1);
    CHECK(r.err.find("bad.ply") != std::string::npos);

    CHECK(box.run("metric c.ply").code == 1);
    CHECK(box.run("metric c.ply c.ply --bogus").code == 1);
    CHECK(box.run("").code == 1);
    CHECK(box.run("--help").code == 0);
}

TEST_CASE("isorate: selections equal the exhaustive search, one file per content and rate") {
    Sandbox box;
    write_file(box.path("Soldier.ply"), random_ply(300, 3));
    auto fast = box.run("isorate Soldier.ply --target R1=0.9 --target R2=2.0 --sweep qp=22:6:46 --out fast");
    REQUIRE(fast.code == 0);
    auto full = box.run("isorate Soldier.ply --target R1=0.9 --target R2=2.0 --sweep qp=22:6:46 --exhaustive --out full");
    REQUIRE(full.code == 0);
    for (const char* name : {"Soldier_R1_isorate.csv", "Soldier_R2_isorate.csv"}) {
        const auto a = slurp(box.path("fast") / name);
        CHECK(a.rfind("sweep_value,chosen_value,bpp,d1,d2,y,yuv\n", 0) == 0);
        CHECK(a == slurp(box.path("full") / name));
    }
    // every feasible row stays at or under the target
    std::istringstream rows(slurp(box.path("fast") / "Soldier_R1_isorate.csv"));
    std::string line;
    std::getline(rows, line);
    int n = 0;
    while (std::getline(rows, line)) {
        ++n;
        const auto bpp = field(line, 0, 2);
        if (bpp != "na") CHECK(std::stod(bpp) <= 0.9);
    }
    CHECK(n == 5);
}

TEST_CASE("isorate: infeasible targets, empty sweep and a missing codec binary") {
    Sandbox box;
    write_file(box.path("Soldier.ply"), random_ply(100, 4));

    auto r = box.run("isorate Soldier.ply --target R1=0.0001 --sweep qp=22,28 --out o");
    REQUIRE(r.code == 0);
    CHECK(slurp(box.path("o") / "Soldier_R1_isorate.csv") ==
          "sweep_value,chosen_value,bpp,d1,d2,y,yuv\n22,na,na,na,na,na,na\n28,na,na,na,na,na,na\n");

    CHECK(box.run("isorate Soldier.ply --target R1=1").code == 1);
    CHECK(box.run("isorate Soldier.ply --target R1=1 --sweep qp=").code == 1);

    write_file(box.path("tmc.toml"), "codec = \"gpcc\"\nname = \"tmc13\"\n"
                                     "command = \"pcqa_no_such_encoder {input} {bitstream} {decoded} {pqs} {qp}\"\n"
                                     "decode_command = \"\"\n");
    r = box.run("--adapter tmc.toml isorate Soldier.ply --target R1=1 --sweep qp=22 --out env");
    CHECK(r.code == 2);
    CHECK(r.err.find("pcqa_no_such_encoder") != std::string::npos);
    CHECK_FALSE(fs::exists(box.path("env")));
}

TEST_CASE("sweep and encode on the mock codec") {
    Sandbox box;
    write_file(box.path("Soldier.ply"), random_ply(200, 5));
    auto r = box.run("sweep Soldier.ply --outer pqs=0.25,0.5 --inner qp=22,40");
    REQUIRE(r.code == 0);
    CHECK(field(r.out, 0, 0) == "pqs");
    CHECK(field(r.out, 4, 0) == "0.5");
    CHECK(field(r.out, 4, 1) == "40");
    CHECK(field(r.out, 4, 2) == "ok");

    write_file(box.path("run.toml"), "dataset = \".\"\nout = \"enc\"\ncontents = \"Soldier\"\nrates = \"R1\"\n");
    r = box.run("encode --manifest run.toml");
    REQUIRE(r.code == 0);
    const auto table = slurp(box.path("enc") / "encodings.csv");
    CHECK(field(table, 1, 0) == "Soldier-mock_p1_r1");
    CHECK(field(table, 1, 5) == "pqs=0.25 qp=46");
    CHECK(fs::exists(box.path("enc") / "Soldier-mock_p3_r1.ply"));
    CHECK(box.run("encode --dataset nowhere --contents Soldier --out x").code == 2);
}

TEST_CASE("ctc lookups") {
    Sandbox box;
    auto r = box.run("ctc gpcc --bit-depth 12");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("r02,0.0625,46\n") != std::string::npos);
    r = box.run("ctc vpcc");
    CHECK(r.out.find("r5,22,16,2\n") != std::string::npos);
    CHECK(box.run("ctc gpcc --bit-depth 11").code == 1);
    CHECK(box.run("ctc pg 30 100").out == "P1\n");
    CHECK(box.run("ctc pg 0 0").code == 1);
    r = box.run("ctc strategy --codec vpcc --rate R2 --strategy P2");
    CHECK(r.out == "aqp = 42\noccupancyPrecision = 4\nsearch = gqp (52 candidates)\n");
    CHECK(box.run("ctc jpeg --content Nobody").code == 1);
}

TEST_CASE("stats dsis: four-score fixture and schema errors") {
    Sandbox box;
    write_file(box.path("d.csv"), "subject_id,stimulus_id,score\ns1,Soldier-gpcc_p1_r1,5\ns2,Soldier-gpcc_p1_r1,4\n"
                                  "s3,Soldier-gpcc_p1_r1,4\ns4,Soldier-gpcc_p1_r1,5\n");
    auto r = box.run("stats dsis d.csv");
    REQUIRE(r.code == 0);
    CHECK(r.out == "stimulus_id,content,codec,rate,strategy,n,mos,ci95\n"
                   "Soldier-gpcc_p1_r1,Soldier,gpcc,R1,P1,4,4.500000,0.918693\n");

    write_file(box.path("bad.csv"), "subject_id,stimulus_id,score\ns1,Soldier-gpcc_p1_r1,5\ns2,Soldier-gpcc_p1_r1,x\n");
    r = box.run("stats dsis bad.csv");
    CHECK(r.code == 1);
    CHECK(r.err.find("bad.csv:3") != std::string::npos);

    write_file(box.path("range.csv"), "subject_id,stimulus_id,score\ns1,a,6\n");
    CHECK(box.run("stats dsis range.csv").code == 1);
    CHECK(box.run("stats dsis none.csv").code == 2);

    r = box.run("stats dsis d.csv --out res");
    REQUIRE(r.code == 0);
    CHECK(slurp(box.path("res") / "screening.csv").rfind("subject_id,ratings,above,below,rejected\n", 0) == 0);
}

TEST_CASE("stats pwc: 15/5 tally is one JOD, output reproducible under --seed") {
    Sandbox box;
    write_file(box.path("v.jsonl"), fifteen_five());
    auto r = box.run("stats pwc v.jsonl --prior 0 --iterations 0");
    REQUIRE(r.code == 0);
    CHECK(field(r.out, 2, 3) == "Soldier-gpcc_p2_r1");
    CHECK(std::stod(field(r.out, 2, 4)) == doctest::Approx(-1.0).epsilon(1e-3));
    CHECK(field(r.out, 2, 5) == "na");

    const auto a = box.run("--seed 7 stats pwc v.jsonl --iterations 300");
    const auto b = box.run("stats pwc v.jsonl --iterations 300 --seed 7 --jobs 3");
    const auto c = box.run("stats pwc v.jsonl --iterations 300 --seed 8");
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out != c.out);
    CHECK(field(a.out, 1, 5) == "0.000000");  // anchor interval
    CHECK(field(a.out, 1, 6) == "0.000000");
}

TEST_CASE("stats pwc: conflicting duplicate and malformed lines") {
    Sandbox box;
    write_file(box.path("c.jsonl"), fifteen_five() + vote("s0", "right"));
    auto r = box.run("stats pwc c.jsonl");
    CHECK(r.code == 1);
    CHECK(r.err.find("c.jsonl:21") != std::string::npos);

    write_file(box.path("dup.jsonl"), fifteen_five() + vote("s0", "left"));
    CHECK(box.run("stats pwc dup.jsonl --prior 0 --iterations 0").out ==
          box.run("stats pwc c.jsonl --prior 0 --iterations 0 2>/dev/null; '" PCQA_CLI_PATH
                  "' stats pwc dup.jsonl --prior 0 --iterations 0")
              .out);

    write_file(box.path("m.jsonl"), vote("s0", "left") + "{\"session\":\"s1\"}\n");
    r = box.run("stats pwc m.jsonl");
    CHECK(r.code == 1);
    CHECK(r.err.find("m.jsonl:2") != std::string::npos);

    write_file(box.path("u.jsonl"), vote("s0", "left") + vote("s1", "left"));
    r = box.run("stats pwc u.jsonl --prior 0 --iterations 0");
    CHECK(r.code == 3);
    CHECK(r.err.find("diverges") != std::string::npos);
    CHECK(box.run("stats pwc u.jsonl --iterations 0").code == 0);
}

TEST_CASE("stats notsure, welch and diagram") {
    Sandbox box;
    write_file(box.path("v.jsonl"), fifteen_five() + vote("s20", "not_sure") + vote("s21", "not_sure"));
    auto r = box.run("stats notsure v.jsonl");
    REQUIRE(r.code == 0);
    CHECK(r.out == "rate,votes,not_sure,proportion\nR1,22,2,0.090909\n");

    r = box.run("stats welch --a 3,4,5 --b 5,4,3");
    CHECK(r.out == "t,df,p_greater,p_less,verdict\n0.000000,4.000000,0.500000000,0.500000000,none\n");
    CHECK(box.run("stats welch --a 3 --b 5,4").code == 1);

    r = box.run("stats diagram --pwc v.jsonl --prior 0 --iterations 0 --threshold 0.5");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("\"winner\": \"P1\"") != std::string::npos);
    CHECK(r.err.find("0 of 1 cells") != std::string::npos);
    CHECK(box.run("stats diagram").code == 1);
}

TEST_CASE("plan and pack") {
    Sandbox box;
    const auto a = box.run("--seed 11 plan --protocol dsis --contents Soldier,Boxer");
    const auto b = box.run("plan --protocol dsis --contents Soldier,Boxer --seed 11");
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out != box.run("plan --protocol dsis --contents Soldier,Boxer --seed 12").out);
    CHECK(box.run("plan --protocol pwc --contents Soldier").code == 1);
    CHECK(box.run("plan --protocol pwc --contents Soldier --mixed").code == 0);
    CHECK(box.run("plan --protocol abx --contents Soldier").code == 1);

    write_file(box.path("s.ply"), random_ply(40, 6));
    REQUIRE(box.run("pack s.ply s.bin").code == 0);
    CHECK(fs::file_size(box.path("s.bin")) == 4 + 40 * 15);
}
