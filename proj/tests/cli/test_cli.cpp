#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = TW_CLI_PATH;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("tw-cli-test-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run_cli(const std::string& args, const std::string& stdout_path = "/dev/null",
            const std::string& stderr_path = "/dev/null") {
  const std::string cmd = kCli + " " + args + " >" + stdout_path + " 2>" + stderr_path;
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  out << content;
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (const char c : text) {
    if (c == '\n') ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("simulate writes a stream and ground truth") {
  TempDir dir;
  const int code = run_cli("simulate --scenario wwd --out " + dir.file("s.jsonl") + " --truth " +
                           dir.file("t.jsonl"));
  CHECK(code == 0);
  const std::string truth = slurp(dir.file("t.jsonl"));
  CHECK(truth == "{\"kind\":\"WWD\",\"t\":4.0,\"actor\":1}\n");
  CHECK(count_lines(slurp(dir.file("s.jsonl"))) == 870);  // 29 s at 30 fps
}

TEST_CASE("simulate rejects unknown scenarios with exit 2") {
  TempDir dir;
  const int code = run_cli("simulate --scenario not-a-thing --out " + dir.file("s.jsonl"),
                           "/dev/null", dir.file("err.txt"));
  CHECK(code == 2);
  CHECK(slurp(dir.file("err.txt")).find("unknown scenario") != std::string::npos);
}

TEST_CASE("same seed gives byte-identical simulations") {
  TempDir dir;
  CHECK(run_cli("simulate --scenario nominal --seed 42 --out " + dir.file("a.jsonl")) == 0);
  CHECK(run_cli("simulate --scenario nominal --seed 42 --out " + dir.file("b.jsonl")) == 0);
  CHECK(run_cli("simulate --scenario nominal --seed 7 --out " + dir.file("c.jsonl")) == 0);
  CHECK(slurp(dir.file("a.jsonl")) == slurp(dir.file("b.jsonl")));
  CHECK(slurp(dir.file("a.jsonl")) != slurp(dir.file("c.jsonl")));
}

TEST_CASE("run on the stop scenario emits exactly one Stop") {
  TempDir dir;
  const int code = run_cli("run --scenario stop --out " + dir.file("events.jsonl"));
  CHECK(code == 0);
  const std::string log = slurp(dir.file("events.jsonl"));
  CHECK(count_lines(log) == 1);
  CHECK(log.find("\"kind\":\"Stop\"") == 1);  // first key of the only record
}

TEST_CASE("run over a stream file matches run over the scenario") {
  TempDir dir;
  CHECK(run_cli("simulate --scenario wwd --out " + dir.file("s.jsonl")) == 0);
  CHECK(run_cli("run --input " + dir.file("s.jsonl") + " --out " + dir.file("e1.jsonl")) == 0);
  CHECK(run_cli("run --scenario wwd --out " + dir.file("e2.jsonl")) == 0);
  CHECK(slurp(dir.file("e1.jsonl")) == slurp(dir.file("e2.jsonl")));
  CHECK(slurp(dir.file("e1.jsonl")).find("\"kind\":\"WWD\"") != std::string::npos);
}

TEST_CASE("run accepts a stream on stdin") {
  TempDir dir;
  CHECK(run_cli("simulate --scenario person --out " + dir.file("s.jsonl")) == 0);
  const std::string cmd = kCli + " run --input - --out " + dir.file("e.jsonl") + " < " +
                          dir.file("s.jsonl") + " >/dev/null 2>/dev/null";
  CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  CHECK(slurp(dir.file("e.jsonl")).find("\"kind\":\"Person\"") != std::string::npos);
}

TEST_CASE("empty stream gives an empty event log and exit 0") {
  TempDir dir;
  write_file(dir.file("empty.jsonl"), "");
  const int code = run_cli("run --input " + dir.file("empty.jsonl") + " --out " +
                           dir.file("events.jsonl"));
  CHECK(code == 0);
  CHECK(slurp(dir.file("events.jsonl")).empty());
}

TEST_CASE("bad config values exit 2 and name the field") {
  TempDir dir;
  const int code = run_cli("run --scenario stop --set stream.frame_interval=0 --out " +
                               dir.file("e.jsonl"),
                           "/dev/null", dir.file("err.txt"));
  CHECK(code == 2);
  CHECK(slurp(dir.file("err.txt")).find("frame_interval") != std::string::npos);
}

TEST_CASE("config file plus --set override drive the pipeline") {
  TempDir dir;
  write_file(dir.file("cfg.json"), R"({"cada": {"traffic_direction": "Increasing_Y"}})");
  CHECK(run_cli("run --scenario wwd --config " + dir.file("cfg.json") + " --out " +
                dir.file("e1.jsonl")) == 0);
  CHECK(count_lines(slurp(dir.file("e1.jsonl"))) == 1);
  // Flipping the declared flow direction turns the counter-flow car into
  // normal traffic and the passers into the wrong-way ones.
  CHECK(run_cli("run --scenario wwd --config " + dir.file("cfg.json") +
                " --set cada.traffic_direction=Decreasing_Y --out " + dir.file("e2.jsonl")) == 0);
  const std::string log = slurp(dir.file("e2.jsonl"));
  CHECK(log.find("\"track_id\":2") == std::string::npos);
}

TEST_CASE("malformed stream lines exit 3 and name the line") {
  TempDir dir;
  write_file(dir.file("bad.jsonl"),
             "{\"frame\":0,\"detections\":[]}\n{\"frame\":1,\"detections\":\n");
  const int code = run_cli("run --input " + dir.file("bad.jsonl") + " --out " +
                               dir.file("e.jsonl"),
                           "/dev/null", dir.file("err.txt"));
  CHECK(code == 3);
  CHECK(slurp(dir.file("err.txt")).find("line 2") != std::string::npos);
}

TEST_CASE("evaluate scores a reference occurrence/detection table") {
  TempDir dir;
  write_file(dir.file("truth.jsonl"),
             "{\"kind\":\"Stop\",\"t\":5.0,\"actor\":1}\n"
             "{\"kind\":\"WWD\",\"t\":4.0,\"actor\":2}\n"
             "{\"kind\":\"Fire\",\"t\":29.0,\"actor\":3}\n"
             "{\"kind\":\"Person\",\"t\":50.0,\"actor\":4}\n");
  write_file(dir.file("events.jsonl"),
             "{\"kind\":\"WWD\",\"t\":12.0,\"track_id\":2,\"evidence\":{}}\n"
             "{\"kind\":\"Stop\",\"t\":7.0,\"track_id\":1,\"evidence\":{}}\n"
             "{\"kind\":\"Fire\",\"t\":29.0,\"track_id\":null,\"evidence\":{}}\n"
             "{\"kind\":\"Person\",\"t\":50.0,\"track_id\":null,\"evidence\":{}}\n");
  const int code = run_cli("evaluate --input " + dir.file("events.jsonl") + " --truth " +
                               dir.file("truth.jsonl") + " --window 10 --out " +
                               dir.file("report.json"),
                           dir.file("table.txt"));
  CHECK(code == 0);
  const std::string table = slurp(dir.file("table.txt"));
  CHECK(table.find("PASS") != std::string::npos);
  const std::string report = slurp(dir.file("report.json"));
  CHECK(report.find("\"latency\": 2.0") != std::string::npos);
  CHECK(report.find("\"latency\": 8.0") != std::string::npos);
  CHECK(report.find("\"max_latency\": 8.0") != std::string::npos);
}

TEST_CASE("evaluate fails on missed events with exit 1") {
  TempDir dir;
  write_file(dir.file("truth.jsonl"), "{\"kind\":\"Stop\",\"t\":5.0,\"actor\":1}\n");
  write_file(dir.file("events.jsonl"), "");
  const int code = run_cli("evaluate --input " + dir.file("events.jsonl") + " --truth " +
                               dir.file("truth.jsonl"),
                           dir.file("table.txt"));
  CHECK(code == 1);
  CHECK(slurp(dir.file("table.txt")).find("MISSED") != std::string::npos);
}

TEST_CASE("evaluate fails on late detections with exit 1") {
  TempDir dir;
  write_file(dir.file("truth.jsonl"), "{\"kind\":\"Stop\",\"t\":5.0,\"actor\":1}\n");
  write_file(dir.file("events.jsonl"),
             "{\"kind\":\"Stop\",\"t\":17.0,\"track_id\":1,\"evidence\":{}}\n");
  CHECK(run_cli("evaluate --input " + dir.file("events.jsonl") + " --truth " +
                dir.file("truth.jsonl") + " --window 10") == 1);
}

TEST_CASE("evaluate rejects malformed event logs with exit 3") {
  TempDir dir;
  write_file(dir.file("truth.jsonl"), "{\"kind\":\"Stop\",\"t\":5.0,\"actor\":1}\n");
  write_file(dir.file("events.jsonl"), "nonsense\n");
  CHECK(run_cli("evaluate --input " + dir.file("events.jsonl") + " --truth " +
                dir.file("truth.jsonl")) == 3);
}

TEST_CASE("simulate-run-evaluate composes cleanly for every builtin") {
  TempDir dir;
  for (const std::string name : {"stop", "wwd", "fire", "person", "nominal"}) {
    CHECK(run_cli("simulate --scenario " + name + " --out " + dir.file("s.jsonl") +
                  " --truth " + dir.file("t.jsonl")) == 0);
    CHECK(run_cli("run --input " + dir.file("s.jsonl") + " --out " + dir.file("e.jsonl")) == 0);
    CHECK(run_cli("evaluate --input " + dir.file("e.jsonl") + " --truth " + dir.file("t.jsonl") +
                  " --window 10") == 0);
  }
}

TEST_CASE("track dumps follow the sampled frames") {
  TempDir dir;
  CHECK(run_cli("run --scenario wwd --out " + dir.file("e.jsonl") + " --tracks " +
                dir.file("tracks.jsonl")) == 0);
  const std::string tracks = slurp(dir.file("tracks.jsonl"));
  CHECK(count_lines(tracks) == 145);  // 870 frames sampled 1-of-6
  CHECK(tracks.find("\"class\":\"Car\"") != std::string::npos);
}
