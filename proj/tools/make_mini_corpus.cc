// Writes the synthetic mini-corpus (raw 10-bit clips, metadata sidecars,
// a clip list and a score table) and optionally a pristine NIQE model
// trained on separate synthetic contents.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "hdrvqa/csv.h"
#include "hdrvqa/niqe.h"
#include "hdrvqa/synth.h"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Generate the synthetic mini-corpus"};
  std::string out, niqe_out;
  int contents = 4, levels = 2, size = 192, frames = 10, pristine = 8;
  std::uint64_t seed = 1;
  app.add_option("-o,--out", out, "Output directory (clips, list.csv, scores.csv)");
  app.add_option("--contents", contents, "Number of contents")->capture_default_str();
  app.add_option("--levels", levels, "Distortion levels per content")->capture_default_str();
  app.add_option("--size", size, "Frame width and height")->capture_default_str();
  app.add_option("--frames", frames, "Frames per clip")->capture_default_str();
  app.add_option("--seed", seed, "Corpus seed")->capture_default_str();
  app.add_option("--niqe-model", niqe_out, "Also train a pristine NIQE model and write it here");
  app.add_option("--pristine-contents", pristine, "Contents used for the NIQE model")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    const hdrvqa::VideoMeta meta = hdrvqa::synth_meta(size, size);
    if (!out.empty()) {
      fs::create_directories(out);
      std::ofstream list(fs::path(out) / "list.csv"), scores(fs::path(out) / "scores.csv");
      list << "video_id,path\n";
      scores << "video_id,score,content_id\n";
      for (const auto& c : hdrvqa::mini_corpus_plan(contents, levels, seed)) {
        const std::string name = c.video_id + ".yuv";
        const auto clip = hdrvqa::synth_clip(c.content_seed, meta, frames, c.distortion);
        hdrvqa::write_video((fs::path(out) / name).string(), clip, meta);
        std::ofstream((fs::path(out) / (name + ".json")).string()) << hdrvqa::meta_to_json(meta).dump(1) << '\n';
        list << c.video_id << ',' << name << '\n';
        scores << c.video_id << ',' << hdrvqa::format_double(c.mos) << ',' << c.content_id << '\n';
      }
    }
    if (!niqe_out.empty()) {
      std::vector<hdrvqa::FramePlane> train;
      for (int c = 0; c < pristine; ++c) {
        for (auto& f : hdrvqa::synth_clip(hdrvqa::kPristineSeedBase + c, meta, frames)) train.push_back(std::move(f.y));
      }
      hdrvqa::save_niqe_model(hdrvqa::train_pristine_model(train), niqe_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "make_mini_corpus: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
