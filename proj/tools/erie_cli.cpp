#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "erie/queue.hpp"
#include "erie/render.hpp"
#include "erie/spec.hpp"
#include "erie/wav.hpp"

namespace {

std::string read_input(const std::string& path) {
    if (path == "-") {
        std::ostringstream buf;
        buf << std::cin.rdbuf();
        return buf.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw erie::Error(erie::Error::Kind::Io, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string base_dir_of(const std::string& path) {
    if (path == "-") return std::filesystem::current_path().string();
    return std::filesystem::absolute(path).parent_path().string();
}

struct CommonOptions {
    std::string specPath;
    std::uint64_t seed = 1;
    int sampleRate = 44100;
    std::string speech = "silence";
    std::string speechCommand;
    std::vector<std::size_t> range;
    std::string bitDepth = "16";
    bool serial = false;
    bool interactive = false;
};

erie::RenderConfig render_config(const CommonOptions& opts) {
    erie::RenderConfig cfg;
    cfg.sampleRate = opts.sampleRate;
    cfg.noiseSeed = opts.seed;
    cfg.parallel = !opts.serial;
    cfg.bitDepth = opts.bitDepth == "32f" ? erie::WavFormat::Float32 : erie::WavFormat::Pcm16;
    if (opts.speech == "omit")
        cfg.speechPolicy = erie::SpeechPolicy::Omit;
    else if (opts.speech == "command")
        cfg.speechPolicy = erie::SpeechPolicy::ExternalCommand;
    else
        cfg.speechPolicy = erie::SpeechPolicy::SilenceEstimate;
    cfg.speechCommand = opts.speechCommand;
    if (!opts.range.empty()) {
        if (opts.range.size() != 2)
            throw erie::Error(erie::Error::Kind::Io, "--range needs two indices: i j");
        cfg.subQueueRange = {{opts.range[0], opts.range[1]}};
    }
    return cfg;
}

// Accepts either a design spec or an already-compiled queue document.
erie::AudioQueue load_queue(const std::string& path, const CommonOptions& opts,
                            std::vector<std::string>* warnings) {
    std::string text = read_input(path);
    if (erie::looks_like_queue_json(text)) return erie::queue_from_json(text);
    erie::SonificationSpec spec = erie::parse_spec(text);
    erie::ValidationReport report = erie::validate(spec);
    if (!report.ok()) {
        std::cerr << report.to_string();
        throw erie::Error(erie::Error::Kind::Validate, "spec has validation errors");
    }
    erie::CompileOptions copts;
    copts.baseDir = base_dir_of(path);
    copts.interactivePlayer = opts.interactive;
    copts.parallel = !opts.serial;
    erie::CompileResult result = erie::compile(spec, copts);
    if (warnings) *warnings = result.warnings;
    return result.queue;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"erie: compile and render declarative sonification designs"};
    app.require_subcommand(1);

    CommonOptions opts;
    std::string outputPath;
    std::string transcriptPath;

    auto add_common = [&](CLI::App* cmd, bool renderFlags) {
        cmd->add_option("spec", opts.specPath, "spec (or queue) JSON path, - for stdin")
            ->required();
        if (renderFlags) {
            cmd->add_option("--seed", opts.seed, "noise seed");
            cmd->add_option("--sample-rate", opts.sampleRate, "22050 | 44100 | 48000");
            cmd->add_option("--speech", opts.speech, "silence | omit | command");
            cmd->add_option("--speech-command", opts.speechCommand,
                            "external TTS command; {} expands to the text, WAV on stdout");
            cmd->add_option("--range", opts.range, "render sub-queues [i, j)")->expected(2);
            cmd->add_option("--bit-depth", opts.bitDepth, "16 | 32f");
            cmd->add_flag("--serial", opts.serial, "disable the parallel render path");
        }
        cmd->add_flag("--interactive", opts.interactive,
                      "include the interactive-player intro line");
    };

    CLI::App* validate = app.add_subcommand("validate", "check a spec, exit 0 iff clean");
    add_common(validate, false);

    CLI::App* compile = app.add_subcommand("compile", "emit the audio-queue IR as JSON");
    add_common(compile, true);
    compile->add_option("-o,--output", outputPath, "output path (stdout default)");

    CLI::App* render = app.add_subcommand("render", "render a spec or queue IR to WAV");
    add_common(render, true);
    render->add_option("-o,--output", outputPath, "output WAV path")->required();
    render->add_option("--transcript", transcriptPath, "write the speech transcript here");

    CLI::App* inspect = app.add_subcommand("inspect", "print the queue table");
    add_common(inspect, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(validate)) {
            erie::ValidationReport warnings;
            erie::SonificationSpec spec =
                erie::parse_spec(read_input(opts.specPath), &warnings);
            erie::ValidationReport report = erie::validate(spec);
            for (const auto& item : warnings.items) report.items.push_back(item);
            for (const auto& item : report.items) {
                std::cout << opts.specPath << ": "
                          << (item.severity == erie::Diagnostic::Severity::Err ? "error"
                                                                               : "warning");
                if (!item.path.empty()) std::cout << " [" << item.path << "]";
                std::cout << ": " << item.message << "\n";
            }
            if (report.ok()) {
                std::cout << "ok: " << opts.specPath << "\n";
                return 0;
            }
            return 1;
        }

        std::vector<std::string> warnings;
        if (app.got_subcommand(compile)) {
            erie::AudioQueue queue = load_queue(opts.specPath, opts, &warnings);
            for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
            std::string json = erie::queue_to_json(queue);
            if (outputPath.empty() || outputPath == "-") {
                std::cout << json;
            } else {
                std::ofstream out(outputPath, std::ios::binary);
                if (!out) throw erie::Error(erie::Error::Kind::Io, "cannot write " + outputPath);
                out << json;
            }
            return 0;
        }
        if (app.got_subcommand(inspect)) {
            erie::AudioQueue queue = load_queue(opts.specPath, opts, &warnings);
            std::cout << erie::queue_table(queue);
            return 0;
        }
        if (app.got_subcommand(render)) {
            erie::AudioQueue queue = load_queue(opts.specPath, opts, &warnings);
            erie::RenderConfig cfg = render_config(opts);
            erie::RenderResult result = erie::render(queue, cfg);
            for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
            for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
            erie::WavWriteReport report = erie::write_wav(result.buffer, outputPath, cfg.bitDepth);
            if (report.clippedSamples)
                std::cerr << "warning: " << report.clippedSamples
                          << " samples clipped at write-out\n";
            if (!transcriptPath.empty()) {
                std::ofstream out(transcriptPath, std::ios::binary);
                out << erie::transcript_text(result.transcript);
            }
            std::cout << outputPath << ": " << result.buffer.duration() << " s, "
                      << result.buffer.frames() << " frames\n";
            return 0;
        }
    } catch (const erie::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == erie::Error::Kind::Io ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
