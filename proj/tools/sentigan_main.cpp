#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sentigan/corpus.hpp"
#include "sentigan/image_io.hpp"
#include "sentigan/infer.hpp"
#include "sentigan/mask_extract.hpp"
#include "sentigan/train.hpp"

namespace fs = std::filesystem;
using namespace sentigan;

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

// --corpus accepts either a "key = value" generator spec or a manifest of
// PNGs on disk; tell them apart by content.
std::vector<CorpusSample> load_corpus_arg(const std::string& path) {
    std::string text = read_file_bytes(path);
    if (looks_like_corpus_spec(text)) return generate_corpus(parse_corpus_spec(text));
    return load_corpus(path);
}

int cmd_extract_masks(const std::string& image_path, const std::string& captions_path,
                      const std::string& seg_path, float alpha, const std::string& out_dir) {
    Tensor image = read_image_png(image_path);
    CaptionNouns captions = load_caption_manifest(captions_path);
    SegmentationMap seg = load_segmentation_png(seg_path);
    if (seg.h != image.dim(1) || seg.w != image.dim(2))
        throw ShapeError("segmentation size " + std::to_string(seg.h) + "x" +
                         std::to_string(seg.w) + " does not match the image");
    MaskFusionConfig cfg;
    cfg.alpha = alpha;
    if (!(alpha > 0.0f)) throw ContractError("--alpha must be positive");
    std::map<std::string, Tensor> masks = extract_object_masks(captions, seg, cfg);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());
    for (const auto& [noun, mask] : masks)
        write_mask_png((fs::path(out_dir) / (noun + ".png")).string(), mask);
    std::cout << masks.size() << " mask(s) written to " << out_dir << "\n";
    return 0;
}

int cmd_train(const std::string& corpus_path, const std::string& config_path,
              const std::string& out_path, int iters_override, long long seed_override) {
    TrainConfig cfg;
    if (!config_path.empty()) cfg = parse_train_config(read_file_bytes(config_path));
    if (iters_override > 0) cfg.iters = iters_override;
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    std::vector<CorpusSample> corpus = load_corpus_arg(corpus_path);
    if (corpus.empty()) throw FormatError("corpus is empty");
    if (corpus.front().image.dim(1) != cfg.net.image_size)
        cfg.net.image_size = corpus.front().image.dim(1);
    cfg.validate();

    Trainer trainer = Trainer::create(cfg);
    for (int i = 0; i < cfg.iters; ++i) {
        LossReport r = train_step(trainer, corpus);
        if ((i + 1) % 100 == 0 || i + 1 == cfg.iters)
            std::cerr << "iter " << (i + 1) << "/" << cfg.iters << " total " << r.total
                      << " recon " << r.g_m << " disc " << r.disc << "\n";
    }
    save_checkpoint(checkpoint_of(trainer), out_path);
    std::cout << "checkpoint written to " << out_path << "\n";
    return 0;
}

std::vector<TransferJob> parse_job_file(const std::string& path, bool have_strength,
                                        float strength, bool have_align_t, float align_t) {
    std::string text = read_file_bytes(path);
    fs::path base = fs::path(path).parent_path();
    auto resolve = [&base](const std::string& p) {
        fs::path q(p);
        return q.is_absolute() ? q.string() : (base / q).string();
    };
    std::vector<TransferJob> jobs;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::vector<std::string> fields;
        size_t pos = 0;
        while (true) {
            size_t tab = t.find('\t', pos);
            fields.push_back(t.substr(pos, tab == std::string::npos ? tab : tab - pos));
            if (tab == std::string::npos) break;
            pos = tab + 1;
        }
        if (fields.size() < 3 || fields.size() > 5)
            throw FormatError("job file line " + std::to_string(lineno) +
                              ": expected 3 to 5 tab-separated fields");
        TransferJob job;
        job.object_mask = read_mask_png(resolve(fields[0]));
        job.reference = read_image_png(resolve(fields[1]));
        job.reference_mask = read_mask_png(resolve(fields[2]));
        try {
            if (fields.size() >= 4) job.strength = std::stof(fields[3]);
            if (fields.size() >= 5) job.align_t = std::stof(fields[4]);
        } catch (const std::exception&) {
            throw FormatError("job file line " + std::to_string(lineno) + ": bad numeric field");
        }
        if (have_strength) job.strength = strength;
        if (have_align_t) job.align_t = align_t;
        jobs.push_back(std::move(job));
    }
    if (jobs.empty()) throw FormatError("job file holds no jobs");
    return jobs;
}

int cmd_transfer(const std::string& model_path, const std::string& input_path,
                 const std::string& jobs_path, bool have_strength, float strength,
                 bool have_align_t, float align_t, const std::string& out_path) {
    Checkpoint ckpt = load_checkpoint(model_path);
    TransferRequest req;
    req.input = read_image_png(input_path);
    req.jobs = parse_job_file(jobs_path, have_strength, strength, have_align_t, align_t);
    TransferResult res = run_transfer(req, ckpt.params, ckpt.net);
    write_image_png(out_path, res.output);
    for (size_t i = 0; i < res.diagnostics.size(); ++i) {
        const JobDiagnostics& d = res.diagnostics[i];
        std::cerr << "job " << i << ": hue in " << d.hue_in << " ref " << d.hue_ref << " out "
                  << d.hue_out << "\n";
    }
    std::cout << "output written to " << out_path << "\n";
    return 0;
}

int cmd_eval(const std::string& model_path, const std::string& corpus_path, int trials) {
    if (trials < 1) throw ContractError("--trials must be >= 1");
    Checkpoint ckpt = load_checkpoint(model_path);
    std::vector<CorpusSample> corpus = load_corpus_arg(corpus_path);
    if (corpus.empty()) throw FormatError("corpus is empty");
    float recon = mean_reconstruction_error(ckpt.params, ckpt.net, corpus);
    RngState rng{1, 0};
    float ratio = eval_hue_shift(ckpt.params, ckpt.net, corpus, trials, rng);
    std::cout << "reconstruction-error " << recon << "\n";
    std::cout << "hue-gap-closure " << ratio << "\n";
    return 0;
}

int cmd_filter_anp(const std::string& anp_path, const std::string& nouns_path) {
    std::set<std::string> nouns;
    {
        std::istringstream in(read_file_bytes(nouns_path));
        std::string line;
        while (std::getline(in, line)) {
            std::string t = trim(line);
            if (!t.empty()) nouns.insert(t);
        }
    }
    std::istringstream in(read_file_bytes(anp_path));
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty()) continue;
        size_t us = t.rfind('_');
        if (us == std::string::npos || us == 0 || us + 1 == t.size())
            throw FormatError("ANP list line " + std::to_string(lineno) +
                              ": expected adjective_noun");
        if (filter_anp(t.substr(us + 1), nouns)) std::cout << t << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Object-level image sentiment transfer"};
    app.require_subcommand(1);

    std::string image, captions, seg, out_dir;
    float alpha = 1.4f;
    auto* extract = app.add_subcommand("extract-masks", "Fuse caption attention with segmentation");
    extract->add_option("--image", image)->required();
    extract->add_option("--captions", captions)->required();
    extract->add_option("--seg", seg)->required();
    extract->add_option("--alpha", alpha);
    extract->add_option("--out-dir", out_dir)->required();

    std::string corpus, config, out;
    int iters = 0;
    long long seed = -1;
    auto* train = app.add_subcommand("train", "Train a model on a corpus");
    train->add_option("--corpus", corpus)->required();
    train->add_option("--config", config);
    train->add_option("--out", out)->required();
    train->add_option("--iters", iters);
    train->add_option("--seed", seed);

    std::string model, input, jobs, t_out;
    float strength = 1.0f, align_t = 1.0f;
    auto* transfer = app.add_subcommand("transfer", "Object-by-object sentiment transfer");
    transfer->add_option("--model", model)->required();
    transfer->add_option("--input", input)->required();
    transfer->add_option("--jobs", jobs)->required();
    auto* strength_opt = transfer->add_option("--strength", strength);
    auto* align_opt = transfer->add_option("--align-t", align_t);
    transfer->add_option("--out", t_out)->required();

    std::string e_model, e_corpus;
    int trials = 20;
    auto* eval = app.add_subcommand("eval", "Report reconstruction and hue-transfer metrics");
    eval->add_option("--model", e_model)->required();
    eval->add_option("--corpus", e_corpus)->required();
    eval->add_option("--trials", trials);

    std::string anp_list, caption_nouns;
    auto* filter = app.add_subcommand("filter-anp", "Keep ANPs whose noun appears in captions");
    filter->add_option("--anp-list", anp_list)->required();
    filter->add_option("--caption-nouns", caption_nouns)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (extract->parsed())
            return cmd_extract_masks(image, captions, seg, alpha, out_dir);
        if (train->parsed()) return cmd_train(corpus, config, out, iters, seed);
        if (transfer->parsed())
            return cmd_transfer(model, input, jobs, strength_opt->count() > 0, strength,
                                align_opt->count() > 0, align_t, t_out);
        if (eval->parsed()) return cmd_eval(e_model, e_corpus, trials);
        if (filter->parsed()) return cmd_filter_anp(anp_list, caption_nouns);
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const ContractError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {  // format, shape, degenerate-mask
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 2;
}
