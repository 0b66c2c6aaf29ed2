#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mobcity/analytics.hpp"
#include "mobcity/http_backend.hpp"
#include "mobcity/scheduler.hpp"

namespace fs = std::filesystem;
using namespace mobcity;

namespace {

std::string data_path(const std::string& name) {
  return std::string(MOBCITY_DATA_DIR) + "/" + name;
}

struct RunOptions {
  std::string map_path = data_path("default_map.txt");
  std::string catalog_path = data_path("action_catalog.json");
  std::string popconfig_path = data_path("population_config.json");
  std::string population_path;
  int generate = 0;
  int days = 1;
  bool weekend = false;
  std::string backend = "mock";
  std::string endpoint = "http://localhost:8000";
  std::string model = "default";
  std::string api_key_env = "MOBCITY_API_KEY";
  bool strict = false;
  std::string sink = "ndjson";
  std::string out = "events.ndjson";
  std::string bulk_index = "mobcity-events";
  std::string weather = "sunny";
  std::uint64_t seed = 0;
  int batch = 32;
  int conv_batch = 16;
  std::string checkpoint_out;
  std::string checkpoint_in;
};

struct AnalyzeOptions {
  std::string log_path;
  std::string map_path = data_path("default_map.txt");
  std::string population_path;
  std::string report = "all";
  int day = 0;
  std::string out = ".";
};

Weather parse_weather_flag(const std::string& w) { return parse_weather(w); }

int cmd_run(const RunOptions& opt) {
  CityMap map = load_map_file(opt.map_path);
  TransitGraphs graphs = TransitGraphs::build(map);
  ActionCatalog catalog = ActionCatalog::load(opt.catalog_path);

  std::vector<Persona> personas;
  if (!opt.population_path.empty()) {
    personas = load_population(opt.population_path);
  } else if (opt.generate > 0) {
    PopulationConfig popcfg = PopulationConfig::load(opt.popconfig_path);
    personas = generate_population(opt.generate, opt.seed, popcfg, map);
  } else {
    std::cerr << "run: provide --population FILE or --generate N\n";
    return 1;
  }

  SimConfig cfg;
  cfg.seed = opt.seed;
  cfg.batch_size = opt.batch;
  cfg.conv_batch_size = opt.conv_batch;
  cfg.start_day_of_week = opt.weekend ? 6 : 1;
  Weather w = parse_weather_flag(opt.weather);
  cfg.weather = {{0, w, w == Weather::Rainy ? 12.0 : 22.0}};

  MockDecisionBackend mock_decisions(opt.seed);
  MockCommBackend mock_comms(opt.seed);
  std::unique_ptr<HttpDecisionBackend> http_decisions;
  std::unique_ptr<HttpCommBackend> http_comms;
  DecisionBackend* decisions = &mock_decisions;
  CommBackend* comms = &mock_comms;
  if (opt.backend == "remote") {
    RemoteBackendConfig rc;
    rc.base_url = opt.endpoint;
    rc.model = opt.model;
    if (const char* key = std::getenv(opt.api_key_env.c_str())) rc.api_key = key;
    bool reachable = true;
    try {
      chat_completion(rc, "Reply with the single integer 0.");
    } catch (const std::exception& ex) {
      reachable = false;
      if (opt.strict) {
        std::cerr << "run: remote backend unreachable (" << ex.what() << ")\n";
        return 1;
      }
      std::cerr << "warning: remote backend unreachable (" << ex.what()
                << "); falling back to the mock backend\n";
    }
    if (reachable) {
      http_decisions = std::make_unique<HttpDecisionBackend>(rc, opt.seed);
      http_comms = std::make_unique<HttpCommBackend>(rc, cfg.social);
      decisions = http_decisions.get();
      comms = http_comms.get();
    }
  } else if (opt.backend != "mock") {
    std::cerr << "run: unknown backend '" << opt.backend << "'\n";
    return 1;
  }

  MemorySink memory;
  std::unique_ptr<NdjsonFileSink> file_sink;
  std::unique_ptr<BulkHttpSink> bulk_sink;
  TeeSink tee;
  tee.attach(&memory);
  if (opt.sink == "ndjson") {
    file_sink = std::make_unique<NdjsonFileSink>(opt.out);
    tee.attach(file_sink.get());
  } else if (opt.sink == "bulk") {
    bulk_sink = std::make_unique<BulkHttpSink>(opt.endpoint, opt.bulk_index);
    tee.attach(bulk_sink.get());
  } else if (opt.sink != "none") {
    std::cerr << "run: unknown sink '" << opt.sink << "'\n";
    return 1;
  }

  Simulation sim(map, graphs, catalog, std::move(personas), cfg, *decisions, *comms, tee);
  if (!opt.checkpoint_in.empty()) sim.load_checkpoint(opt.checkpoint_in);

  double wall = 0.0;
  long long tokens = 0;
  int batches = 0, requests = 0, fallbacks = 0, conversations = 0;
  for (const DaySummary& s : sim.run(opt.days)) {
    wall += s.wall_seconds;
    tokens += s.prompt_tokens;
    batches += s.decision_batches;
    requests += s.decision_requests;
    fallbacks += s.fallback_decisions;
    conversations += s.conversation_tasks;
    std::cout << "day " << s.day << ": " << s.wall_seconds << " s, " << s.decision_requests
              << " decisions in " << s.decision_batches << " batches, "
              << s.conversation_tasks << " conversations, " << s.voluntary_actions
              << " voluntary / " << s.mandatory_actions << " mandatory actions\n";
  }
  tee.flush();
  if (!opt.checkpoint_out.empty()) sim.save_checkpoint(opt.checkpoint_out);

  std::cout << "total wall clock: " << wall << " s\n";
  std::cout << "backend calls: " << batches << " batches / " << requests << " requests ("
            << fallbacks << " fallbacks)\n";
  std::cout << "prompt tokens (estimated): " << tokens << "\n";
  std::cout << "events logged: " << memory.events().size() << "\n";
  return 0;
}

int cmd_analyze(const AnalyzeOptions& opt) {
  std::vector<EventRecord> events = import_ndjson(opt.log_path);
  if (events.empty()) {
    std::cerr << "analyze: no events in " << opt.log_path << "\n";
    return 1;
  }
  EventLogView view(events);
  fs::create_directories(opt.out);
  auto want = [&](const std::string& kind) { return opt.report == "all" || opt.report == kind; };

  if (want("heatmap")) {
    CityMap map = load_map_file(opt.map_path);
    write_text_file(opt.out + "/heatmap.csv", to_csv(venue_heatmap(view, map, opt.day)));
  }
  if (want("activity") || want("transport") || want("needs")) {
    if (opt.population_path.empty()) {
      std::cerr << "analyze: this report needs --population FILE\n";
      return 1;
    }
    std::vector<Persona> personas = load_population(opt.population_path);
    if (want("activity")) {
      write_text_file(opt.out + "/activity_distribution.csv",
                      to_csv(activity_distribution(view, personas)));
    }
    if (want("transport")) {
      write_text_file(opt.out + "/transport_shares.csv",
                      to_csv(transport_shares(view, personas)));
    }
    if (want("needs")) {
      write_text_file(opt.out + "/needs_timeseries.csv",
                      to_csv(needs_timeseries(view, personas, opt.day)));
    }
  }
  std::cout << "reports written to " << opt.out << "\n";
  return 0;
}

int cmd_genpop(int n, std::uint64_t seed, const std::string& map_path,
               const std::string& popconfig_path, const std::string& out) {
  CityMap map = load_map_file(map_path);
  PopulationConfig popcfg = PopulationConfig::load(popconfig_path);
  save_population(generate_population(n, seed, popcfg, map), out);
  std::cout << "wrote " << n << " personas to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"City-scale generative-agent mobility simulator"};
  app.require_subcommand(1);

  RunOptions run;
  CLI::App* run_cmd = app.add_subcommand("run", "Simulate one or more days");
  run_cmd->add_option("--map", run.map_path, "Map document");
  run_cmd->add_option("--catalog", run.catalog_path, "Action catalog");
  run_cmd->add_option("--population", run.population_path, "Population JSON file");
  run_cmd->add_option("--generate", run.generate, "Generate N personas instead");
  run_cmd->add_option("--population-config", run.popconfig_path, "Generation config");
  run_cmd->add_option("--days", run.days, "Days to simulate")->check(CLI::PositiveNumber);
  run_cmd->add_flag("--weekend", run.weekend, "Start on Saturday");
  run_cmd->add_option("--backend", run.backend, "mock | remote");
  run_cmd->add_option("--endpoint", run.endpoint, "Remote backend / bulk sink base URL");
  run_cmd->add_option("--model", run.model, "Remote model name");
  run_cmd->add_option("--api-key-env", run.api_key_env, "Env var holding the API key");
  run_cmd->add_flag("--strict", run.strict, "Fail instead of falling back to mock");
  run_cmd->add_option("--sink", run.sink, "ndjson | bulk | none");
  run_cmd->add_option("--out", run.out, "NDJSON log path");
  run_cmd->add_option("--bulk-index", run.bulk_index, "Bulk sink index name");
  run_cmd->add_option("--weather", run.weather, "sunny | cloudy | rainy");
  run_cmd->add_option("--seed", run.seed, "Master seed");
  run_cmd->add_option("--batch", run.batch, "Decision batch threshold B");
  run_cmd->add_option("--conv-batch", run.conv_batch, "Conversation batch threshold");
  run_cmd->add_option("--checkpoint-out", run.checkpoint_out, "Save state after the run");
  run_cmd->add_option("--checkpoint-in", run.checkpoint_in, "Resume from a checkpoint");

  AnalyzeOptions an;
  CLI::App* an_cmd = app.add_subcommand("analyze", "Build analytics tables from a log");
  an_cmd->add_option("--log", an.log_path, "NDJSON event log")->required();
  an_cmd->add_option("--map", an.map_path, "Map document (heatmap)");
  an_cmd->add_option("--population", an.population_path, "Population JSON (groupings)");
  an_cmd->add_option("--report", an.report, "heatmap | activity | transport | needs | all");
  an_cmd->add_option("--day", an.day, "Day index to analyze");
  an_cmd->add_option("--out", an.out, "Output directory");

  int gp_n = 0;
  std::uint64_t gp_seed = 0;
  std::string gp_map = data_path("default_map.txt");
  std::string gp_cfg = data_path("population_config.json");
  std::string gp_out = "population.json";
  CLI::App* gp_cmd = app.add_subcommand("genpop", "Generate a synthetic population");
  gp_cmd->add_option("--generate", gp_n, "Number of personas")->required();
  gp_cmd->add_option("--seed", gp_seed, "Generation seed");
  gp_cmd->add_option("--map", gp_map, "Map document");
  gp_cmd->add_option("--population-config", gp_cfg, "Generation config");
  gp_cmd->add_option("--out", gp_out, "Output JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(run);
    if (an_cmd->parsed()) return cmd_analyze(an);
    if (gp_cmd->parsed()) return cmd_genpop(gp_n, gp_seed, gp_map, gp_cfg, gp_out);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
