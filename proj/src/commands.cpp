#include "odcsa/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "odcsa/accounting.hpp"
#include "odcsa/blockcheck.hpp"
#include "odcsa/checkpoint.hpp"
#include "odcsa/config.hpp"
#include "odcsa/netpbm.hpp"
#include "odcsa/synth.hpp"
#include "odcsa/train.hpp"

namespace fs = std::filesystem;

namespace odcsa {

namespace {

Config config_or_default(const std::string& config_path) {
  return config_path.empty() ? Config{} : parse_config_file(config_path);
}

}  // namespace

std::string runlog_path_for(const std::string& ckpt_path) { return ckpt_path + ".runlog.csv"; }

int cmd_synth(const std::string& out_dir, int count, int size, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.count = count;
  cfg.size = size;
  cfg.seed = seed;
  const auto samples = synth_generate(cfg);
  save_dataset(samples, out_dir);
  std::cout << "wrote " << samples.size() << " samples (" << size << "x" << size << ", seed "
            << seed << ") to " << out_dir << "\n";
  return 0;
}

int cmd_train(const std::string& config_path) {
  const Config cfg = parse_config_file(config_path);
  if (cfg.data_dir.empty()) {
    throw std::runtime_error(config_path + ": data_dir is required for training");
  }
  const auto data = load_dataset(cfg.data_dir);

  OdcSaNet net(cfg.ablation);
  Prng init_rng(cfg.seed);
  net.init_params(init_rng);

  const std::string runlog_path = runlog_path_for(cfg.ckpt_path);
  std::ofstream runlog(runlog_path, std::ios::binary);
  if (!runlog) {
    throw std::runtime_error(runlog_path + ": cannot write run log");
  }
  const auto logs = train_model(net, data, cfg, -1, &runlog);
  runlog.close();
  save_checkpoint(net, cfg.ckpt_path);

  std::cout << "trained " << logs.size() << " steps over " << cfg.epochs << " epochs on "
            << data.size() << " samples\n";
  if (!logs.empty()) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", logs.back().total);
    std::cout << "final total loss " << buf << "\n";
  }
  std::cout << "checkpoint: " << cfg.ckpt_path << "\n";
  std::cout << "run log:    " << runlog_path << "\n";
  return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& data_dir,
             const std::string& report_path, const std::string& config_path) {
  const Config cfg = config_or_default(config_path);
  OdcSaNet net(flags_from_checkpoint(ckpt_path));
  load_checkpoint(net, ckpt_path);
  const auto data = load_dataset(data_dir);
  const MetricReport rep = evaluate_model(net, data, cfg.size);

  const std::string dataset = fs::path(data_dir).filename().string();
  std::ofstream os(report_path, std::ios::binary);
  if (!os) {
    throw std::runtime_error(report_path + ": cannot write report");
  }
  os << metric_csv_header() << "\n" << metric_csv_row(dataset, rep) << "\n";
  std::cout << metric_csv_header() << "\n" << metric_csv_row(dataset, rep) << "\n";
  return 0;
}

int cmd_predict(const std::string& ckpt_path, const std::string& image_path,
                const std::string& out_path, const std::string& config_path) {
  const Config cfg = config_or_default(config_path);
  OdcSaNet net(flags_from_checkpoint(ckpt_path));
  load_checkpoint(net, ckpt_path);

  Sample sample;
  sample.id = fs::path(image_path).stem().string();
  sample.image = image_from_netpbm(read_netpbm(image_path));
  sample.mask = Tensor4(Shape4{1, 1, sample.image.h(), sample.image.w()});

  const Tensor4 prob = predict_prob(net, sample, cfg.size);
  write_pgm(prob, out_path);
  std::cout << "wrote " << out_path << " (" << prob.w() << "x" << prob.h() << ")\n";
  return 0;
}

int cmd_gradcheck(const std::string& block) {
  const auto results = run_block_gradchecks(block);
  bool all_pass = true;
  for (const auto& r : results) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1e", r.max_rel_err);
    std::cout << r.name << ": max_rel_err " << buf << " " << (r.pass ? "PASS" : "FAIL") << "\n";
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : 1;
}

int cmd_flops(int size) {
  OdcSaNet net;
  std::cout << format_cost_table(count_params_flops(net, size));
  return 0;
}

int cmd_config_dump(const std::string& config_path) {
  std::cout << dump_config(config_or_default(config_path));
  return 0;
}

}  // namespace odcsa
