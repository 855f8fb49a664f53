// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <unistd.h>

#include "reidtrack/formats.hpp"
#include "checks.hpp"

using namespace reidtrack;
using testutil::errc_of;

namespace {

std::string tmp_path(const std::string& name) {
    static const std::filesystem::path dir = [] {
        auto d = std::filesystem::temp_directory_path() /
                 ("reidtrack_io_" + std::to_string(::getpid()));
        std::filesystem::create_directories(d);
        return d;
    }();
    return (dir / name).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void spill(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << text;
}

// captures the message of the Error an action throws
template <typename Fn>
std::string error_text(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

std::vector<FrameObservations> sample_stream() {
    std::vector<FrameObservations> stream;
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> coord(0.0, 640.0);
    for (long f = 0; f < 6; ++f) {
        FrameObservations obs;
        obs.frame = f == 5 ? 9 : f; // a gap in the numbering is legal
        const std::size_t n = f == 2 ? 0 : 1 + f % 3;
        for (std::size_t i = 0; i < n; ++i) {
            Detection d;
            d.frame = obs.frame;
            d.bbox = {coord(rng), coord(rng), 10.5, 20.25};
            d.conf = 0.9 - 0.1 * static_cast<double>(i);
            if (i % 2 == 0) {
                Keypoints k;
                for (auto& p : k.points) p = {coord(rng), coord(rng), 0.8};
                k.points[3].conf = 0.0;
                d.keypoints = k;
            }
            d.embedding = Embedding{0.1 * f, -1.5, coord(rng), 1e-12};
            obs.detections.push_back(std::move(d));
        }
        stream.push_back(std::move(obs));
    }
    return stream;
}

bool same_stream(const std::vector<FrameObservations>& a,
                 const std::vector<FrameObservations>& b,
                 bool exact_embeddings = true) {
    if (a.size() != b.size()) return false;
    for (std::size_t f = 0; f < a.size(); ++f) {
        if (a[f].frame != b[f].frame) return false;
        if (a[f].detections.size() != b[f].detections.size()) return false;
        for (std::size_t i = 0; i < a[f].detections.size(); ++i) {
            const Detection& x = a[f].detections[i];
            const Detection& y = b[f].detections[i];
            if (x.bbox.x != y.bbox.x || x.bbox.y != y.bbox.y ||
                x.bbox.w != y.bbox.w || x.bbox.h != y.bbox.h)
                return false;
            if (x.conf != y.conf) return false;
            if (x.keypoints.has_value() != y.keypoints.has_value())
                return false;
            if (x.keypoints) {
                for (std::size_t k = 0; k < kKeypointCount; ++k) {
                    const Keypoint& p = x.keypoints->points[k];
                    const Keypoint& q = y.keypoints->points[k];
                    if (p.x != q.x || p.y != q.y || p.conf != q.conf)
                        return false;
                }
            }
            if (x.embedding.has_value() != y.embedding.has_value())
                return false;
            if (x.embedding && exact_embeddings &&
                *x.embedding != *y.embedding)
                return false;
        }
    }
    return true;
}

} // namespace

TEST_CASE("format_double emits the shortest faithful text") {
    CHECK(format_double(42.0) == "42");
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(0.35) == "0.35");
    CHECK(format_double(-2.5) == "-2.5");
    for (const double v : {0.1 + 0.2, 1.0 / 3.0, 1e-12, 1e300, 3.14159265358979,
                           123456789.123456, -0.0625}) {
        CHECK(std::stod(format_double(v)) == v);
    }
}

TEST_CASE("detections round-trip with inline embeddings") {
    const auto stream = sample_stream();
    const std::string path = tmp_path("dets.jsonl");
    write_detections(stream, path);
    CHECK(same_stream(read_detections(path), stream));
}

TEST_CASE("detections line helpers mirror the file format") {
    const auto stream = sample_stream();
    for (const auto& obs : stream) {
        const FrameObservations back =
            detections_line_parse(detections_line_dump(obs));
        CHECK(same_stream({back}, {obs}));
    }
}

TEST_CASE("sidecar embeddings round-trip at float precision") {
    const auto stream = sample_stream();
    const std::string path = tmp_path("side.jsonl");
    write_detections(stream, path, EmbeddingStorage::sidecar);

    const std::string raw = slurp(path + ".emb");
    CHECK(raw.substr(0, 4) == "RTEB");
    CHECK(raw.find("emb_ref") == std::string::npos);
    CHECK(slurp(path).find("emb_ref") != std::string::npos);

    const auto back = read_detections(path);
    REQUIRE(same_stream(back, stream, /*exact_embeddings=*/false));
    for (std::size_t f = 0; f < stream.size(); ++f) {
        for (std::size_t i = 0; i < stream[f].detections.size(); ++i) {
            const auto& orig = *stream[f].detections[i].embedding;
            const auto& got = *back[f].detections[i].embedding;
            REQUIRE(got.size() == orig.size());
            for (std::size_t k = 0; k < orig.size(); ++k) {
                CHECK(got[k] == static_cast<double>(
                                    static_cast<float>(orig[k])));
            }
        }
    }

    // a second writer pass over the re-read stream is byte-identical
    const std::string again = tmp_path("side2.jsonl");
    write_detections(back, again, EmbeddingStorage::sidecar);
    CHECK(slurp(again) == slurp(path));
    CHECK(slurp(again + ".emb") == slurp(path + ".emb"));
}

TEST_CASE("sidecar output cannot go to stdout") {
    CHECK(errc_of([&] {
              write_detections(sample_stream(), "-",
                               EmbeddingStorage::sidecar);
          }) == Errc::io_error);
}

TEST_CASE("detection frames must increase") {
    const std::string path = tmp_path("order.jsonl");
    spill(path, "{\"frame\": 5, \"dets\": []}\n{\"frame\": 5, \"dets\": []}\n");
    CHECK(errc_of([&] { read_detections(path); }) ==
          Errc::non_monotonic_frame);
    spill(path, "{\"frame\": 5, \"dets\": []}\n{\"frame\": 3, \"dets\": []}\n");
    CHECK(errc_of([&] { read_detections(path); }) ==
          Errc::non_monotonic_frame);
}

TEST_CASE("detection embeddings must share one dimension") {
    const std::string path = tmp_path("dims.jsonl");
    spill(path,
          "{\"frame\": 0, \"dets\": [{\"box\": [0,0,1,1], \"emb\": [1,2]}]}\n"
          "{\"frame\": 1, \"dets\": [{\"box\": [0,0,1,1], \"emb\": [1,2,3]}]}\n");
    CHECK(errc_of([&] { read_detections(path); }) ==
          Errc::embedding_dim_mismatch);
}

TEST_CASE("detection parse failures name the line") {
    const std::string path = tmp_path("bad.jsonl");

    spill(path, "{\"frame\": 0, \"dets\": []}\nnot json at all\n");
    CHECK(errc_of([&] { read_detections(path); }) == Errc::parse_error);
    CHECK(error_text([&] { read_detections(path); }).find(":2:") !=
          std::string::npos);

    spill(path, "{\"frame\": 0, \"dets\": [{\"conf\": 1.0}]}\n");
    CHECK(errc_of([&] { read_detections(path); }) == Errc::parse_error);

    spill(path, "{\"frame\": 0, \"dets\": [{\"box\": [0,0,1,1], "
                "\"kps\": [[1,2,3]]}]}\n");
    CHECK(errc_of([&] { read_detections(path); }) == Errc::parse_error);

    spill(path, "{\"frame\": 0, \"dets\": [{\"box\": [0,0,1,1], "
                "\"emb\": [1], \"emb_ref\": 8}]}\n");
    CHECK(errc_of([&] { read_detections(path); }) == Errc::parse_error);

    CHECK(errc_of([&] { read_detections(tmp_path("no-such-file")); }) ==
          Errc::io_error);
}

TEST_CASE("an empty detections file is an empty stream") {
    const std::string path = tmp_path("empty.jsonl");
    spill(path, "");
    CHECK(read_detections(path).empty());
}

TEST_CASE("ground truth round-trips through CSV") {
    GroundTruth gt;
    gt.frames[0] = {{"p1", {10.0, 20.0, 30.0, 62.0}},
                    {"p2", {100.25, 20.5, 32.0, 66.0}}};
    gt.frames[3] = {{"walker with spaces", {0.1, 0.2, 0.3, 0.4}}};
    const std::string path = tmp_path("gt.csv");
    write_ground_truth(gt, path);

    const GroundTruth back = read_ground_truth(path);
    REQUIRE(back.frames.size() == 2);
    REQUIRE(back.frames.at(0).size() == 2);
    CHECK(back.frames.at(0)[0].label == "p1");
    CHECK(back.frames.at(0)[1].bbox.x == 100.25);
    CHECK(back.frames.at(3)[0].label == "walker with spaces");
    CHECK(back.frames.at(3)[0].bbox.h == 0.4);
    CHECK(back.total_frames() == 4);
}

TEST_CASE("ground truth reader enforces its format") {
    const std::string path = tmp_path("gt-bad.csv");

    spill(path, "frame,label,x,y,w,h\r\n0,p1,1,2,3,4\r\n");
    CHECK(read_ground_truth(path).frames.at(0)[0].label == "p1"); // CRLF ok

    spill(path, "frame,label,x,w,h\n");
    CHECK(errc_of([&] { read_ground_truth(path); }) == Errc::parse_error);

    spill(path, "");
    CHECK(errc_of([&] { read_ground_truth(path); }) == Errc::parse_error);

    spill(path, "frame,label,x,y,w,h\n0,p1,1,2,3\n");
    CHECK(errc_of([&] { read_ground_truth(path); }) == Errc::parse_error);

    spill(path, "frame,label,x,y,w,h\n0,p1,one,2,3,4\n");
    CHECK(errc_of([&] { read_ground_truth(path); }) == Errc::parse_error);

    spill(path, "frame,label,x,y,w,h\n0,p1,1,2,3,4\n0,p1,9,9,3,4\n");
    CHECK(errc_of([&] { read_ground_truth(path); }) ==
          Errc::duplicate_label_in_frame);

    spill(path, "frame,label,x,y,w,h\n");
    CHECK(read_ground_truth(path).frames.empty()); // header only: no people
}

TEST_CASE("galleries round-trip through JSON lines") {
    std::vector<GallerySample> gallery;
    for (int i = 0; i < 10; ++i) {
        gallery.push_back({"p" + std::to_string(i % 3 + 1),
                           {0.5 * i, -1.25, 1e-9 * i}});
    }
    const std::string path = tmp_path("gallery.jsonl");
    write_gallery(gallery, path);
    const auto back = read_gallery(path);
    REQUIRE(back.size() == gallery.size());
    for (std::size_t i = 0; i < gallery.size(); ++i) {
        CHECK(back[i].label == gallery[i].label);
        CHECK(back[i].embedding == gallery[i].embedding);
    }

    spill(path, "{\"label\": \"p1\"}\n");
    CHECK(errc_of([&] { read_gallery(path); }) == Errc::parse_error);
}

TEST_CASE("models survive the binary format bit for bit") {
    std::vector<GallerySample> samples;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0.0, 0.4);
    for (int i = 0; i < 12; ++i) {
        samples.push_back({"a", {noise(rng), noise(rng), noise(rng)}});
        samples.push_back({"b", {4.0 + noise(rng), noise(rng), noise(rng)}});
        samples.push_back({"c", {noise(rng), 4.0 + noise(rng), noise(rng)}});
    }
    TrainOptions opts;
    opts.min_conf = 0.4;
    const RbfSvmModel model = train_classifier(samples, opts);

    const std::string path = tmp_path("model.rtsv");
    write_model(model, path);
    const RbfSvmModel back = read_model(path);

    CHECK(back.classes == model.classes);
    CHECK(back.dim == model.dim);
    CHECK(back.gamma == model.gamma);
    CHECK(back.c == model.c);
    CHECK(back.min_conf == model.min_conf);
    REQUIRE(back.machines.size() == model.machines.size());
    for (std::size_t i = 0; i < model.machines.size(); ++i) {
        CHECK(back.machines[i].bias == model.machines[i].bias);
        CHECK(back.machines[i].dual_coefs == model.machines[i].dual_coefs);
        CHECK(back.machines[i].support_vectors ==
              model.machines[i].support_vectors);
    }

    // the loaded model classifies every probe identically
    std::uniform_real_distribution<double> coord(-2.0, 6.0);
    for (int i = 0; i < 100; ++i) {
        const Embedding e{coord(rng), coord(rng), coord(rng)};
        const Prediction p = classify(model, e);
        const Prediction q = classify(back, e);
        CHECK(p.identity == q.identity);
        CHECK(p.confidence == q.confidence);
    }
}

TEST_CASE("model loading rejects foreign and damaged files") {
    std::vector<GallerySample> samples{{"a", {0.0}}, {"a", {0.1}},
                                       {"b", {5.0}}, {"b", {5.1}}};
    const RbfSvmModel model = train_classifier(samples);
    const std::string path = tmp_path("model2.rtsv");
    write_model(model, path);
    const std::string good = slurp(path);

    std::string wrong_magic = good;
    wrong_magic[0] = 'X';
    spill(path, wrong_magic);
    CHECK(errc_of([&] { read_model(path); }) == Errc::parse_error);

    std::string future = good;
    future[4] = 2; // format version lives right after the magic
    spill(path, future);
    CHECK(errc_of([&] { read_model(path); }) == Errc::version_mismatch);

    spill(path, good.substr(0, good.size() / 2));
    CHECK(errc_of([&] { read_model(path); }) == Errc::parse_error);

    spill(path, good.substr(0, 3));
    CHECK(errc_of([&] { read_model(path); }) == Errc::parse_error);
}

TEST_CASE("track output round-trips with events in place") {
    TrackOutput out;
    for (long f = 0; f < 4; ++f) {
        FrameOutput fo;
        fo.frame = f;
        if (f != 2) { // a frame with no entries still gets a line
            FrameEntry e;
            e.track_id = f + 1;
            e.identity = f == 0 ? Identity::unknown() : Identity::known("p1");
            e.bbox = {1.5 * f, 2.0, 30.0, 62.0};
            fo.entries.push_back(e);
        }
        out.frames.push_back(std::move(fo));
    }
    ReidEvent birth;
    birth.frame = 0;
    birth.rule = ReidRule::new_or_unknown;
    birth.affected = {1};
    birth.outcomes.push_back(
        {1, Identity::unknown(), Identity::known("p1"), 0.82, true});
    out.events.push_back(birth);
    ReidEvent clash;
    clash.frame = 3;
    clash.rule = ReidRule::duplicate_id;
    clash.affected = {1, 4};
    clash.outcomes.push_back(
        {1, Identity::known("p1"), Identity::known("p1"), 0.9, true});
    clash.outcomes.push_back(
        {4, Identity::known("p1"), Identity::unknown(), 0.0, false});
    out.events.push_back(clash);
    out.reid_count = 3;

    const std::string path = tmp_path("tracks.jsonl");
    write_tracks(out, path);
    const TrackOutput back = read_tracks(path);

    CHECK(back.reid_count == 3);
    REQUIRE(back.frames.size() == 4);
    CHECK(back.frames[2].entries.empty());
    CHECK(back.frames[1].entries[0].identity == Identity::known("p1"));
    CHECK(back.frames[3].entries[0].bbox.x == 4.5);
    REQUIRE(back.events.size() == 2);
    CHECK(back.events[0].rule == ReidRule::new_or_unknown);
    CHECK(back.events[0].affected == std::vector<std::int64_t>{1});
    CHECK(back.events[0].outcomes[0].confidence == 0.82);
    CHECK(back.events[0].outcomes[0].classified);
    CHECK(back.events[1].rule == ReidRule::duplicate_id);
    CHECK(back.events[1].affected == (std::vector<std::int64_t>{1, 4}));
    CHECK(back.events[1].outcomes[1].new_identity == Identity::unknown());
    CHECK(!back.events[1].outcomes[1].classified);

    // event lines sit directly behind the frame they belong to
    const std::string text = slurp(path);
    CHECK(text.find("\"type\":\"meta\"") < text.find("\"type\":\"frame\""));
    const auto ev_pos = text.find("\"rule\":\"duplicate_id\"");
    const auto f3_pos = text.find("\"frame\":3,\"entries\"");
    REQUIRE(ev_pos != std::string::npos);
    REQUIRE(f3_pos != std::string::npos);
    CHECK(f3_pos < ev_pos);
    CHECK(text.find("\"type\":\"summary\"") > ev_pos);
}

TEST_CASE("tracks reader wants a complete file") {
    TrackOutput out;
    FrameOutput fo;
    fo.frame = 0;
    out.frames.push_back(fo);
    const std::string path = tmp_path("tracks-bad.jsonl");
    write_tracks(out, path);
    const std::string good = slurp(path);

    // drop the trailing summary line
    const auto last_line = good.rfind("{\"type\":\"summary\"");
    REQUIRE(last_line != std::string::npos);
    spill(path, good.substr(0, last_line));
    CHECK(errc_of([&] { read_tracks(path); }) == Errc::parse_error);

    // future format version
    std::string future = good;
    const auto vpos = future.find("\"version\":1");
    REQUIRE(vpos != std::string::npos);
    future.replace(vpos, 11, "\"version\":9");
    spill(path, future);
    CHECK(errc_of([&] { read_tracks(path); }) == Errc::version_mismatch);

    // frame lines out of order
    spill(path,
          "{\"type\":\"meta\",\"format\":\"reidtrack-tracks\",\"version\":1}\n"
          "{\"type\":\"frame\",\"frame\":2,\"entries\":[]}\n"
          "{\"type\":\"frame\",\"frame\":1,\"entries\":[]}\n"
          "{\"type\":\"summary\",\"frames\":2,\"events\":0,\"reid_count\":0}\n");
    CHECK(errc_of([&] { read_tracks(path); }) == Errc::non_monotonic_frame);
}

TEST_CASE("scenario specs round-trip through JSON") {
    ScenarioSpec spec;
    spec.agents = 4;
    spec.frames = 321;
    spec.width = 800.0;
    spec.height = 600.0;
    spec.crossings = {{{0, 2}, 50, 90, 6}, {{1, 3}, 150, 200, 0}};
    spec.exits = {{2, 100, 140}};
    spec.det_noise = 0.4;
    spec.drop_rate = 0.02;
    spec.fp_rate = 0.05;
    spec.emb = {48, 4.5, 1.25};
    spec.seed = 987654321;
    spec.gallery_per_agent = 12;

    const ScenarioSpec back = scenario_from_json(scenario_to_json(spec));
    CHECK(back.agents == spec.agents);
    CHECK(back.frames == spec.frames);
    CHECK(back.width == spec.width);
    CHECK(back.height == spec.height);
    REQUIRE(back.crossings.size() == 2);
    CHECK(back.crossings[0].agents == spec.crossings[0].agents);
    CHECK(back.crossings[0].span_begin == 50);
    CHECK(back.crossings[0].occlude_frames == 6);
    REQUIRE(back.exits.size() == 1);
    CHECK(back.exits[0].agent == 2);
    CHECK(back.exits[0].reenter_frame == 140);
    CHECK(back.det_noise == spec.det_noise);
    CHECK(back.drop_rate == spec.drop_rate);
    CHECK(back.fp_rate == spec.fp_rate);
    CHECK(back.emb.dim == 48);
    CHECK(back.emb.class_sep == 4.5);
    CHECK(back.emb.noise_std == 1.25);
    CHECK(back.seed == spec.seed);
    CHECK(back.gallery_per_agent == 12);
}

TEST_CASE("scenario JSON accepts preset references with overrides") {
    const ScenarioSpec base = preset("hard_surveillance");
    const ScenarioSpec plain =
        scenario_from_json("{\"preset\": \"hard_surveillance\"}");
    CHECK(plain.agents == base.agents);
    CHECK(plain.frames == base.frames);
    CHECK(plain.seed == base.seed);

    const ScenarioSpec tweaked = scenario_from_json(
        "{\"preset\": \"normal_high\", \"seed\": 5, \"drop_rate\": 0.1}");
    CHECK(tweaked.agents == 3);
    CHECK(tweaked.seed == 5);
    CHECK(tweaked.drop_rate == 0.1);

    CHECK(errc_of([] { scenario_from_json("{\"preset\": \"nope\"}"); }) ==
          Errc::unknown_preset);
    CHECK(errc_of([] { scenario_from_json("{\"bogus\": 1}"); }) ==
          Errc::invalid_spec);
    CHECK(errc_of([] { scenario_from_json("[1,2]"); }) == Errc::invalid_spec);
    CHECK(errc_of([] { scenario_from_json("{{{"); }) == Errc::parse_error);
}

TEST_CASE("config text: defaults, comments and full coverage") {
    const AppConfig d = parse_config("");
    CHECK(std::get<CentroidConfig>(d.tracker).max_dist == 50.0);
    CHECK(!d.reid_model);
    CHECK(!d.reid_min_conf);
    CHECK(!d.speed_limit);
    CHECK(d.eval_iou_min == 0.5);

    const AppConfig c = parse_config(
        "# tuned for the lobby camera\n"
        "tracker.kind = centroid\n"
        "tracker.max_dist = 75.5   # generous radius\n"
        "\n"
        "reid.model = lobby.rtsv\n"
        "reid.min_conf = 0.6\n"
        "reid.speed_limit = 40\n"
        "eval.iou_min = 0.4\n");
    CHECK(std::get<CentroidConfig>(c.tracker).max_dist == 75.5);
    CHECK(c.reid_model == "lobby.rtsv");
    CHECK(c.reid_min_conf == 0.6);
    CHECK(c.speed_limit == 40.0);
    CHECK(c.eval_iou_min == 0.4);

    const AppConfig s = parse_config(
        "tracker.kind = sort\n"
        "tracker.max_age = 3\n"
        "tracker.min_hits = 1\n"
        "tracker.iou_thresh = 0.25\n");
    const SortConfig& sc = std::get<SortConfig>(s.tracker);
    CHECK(sc.max_age == 3);
    CHECK(sc.min_hits == 1);
    CHECK(sc.iou_thresh == 0.25);

    const AppConfig ds = parse_config(
        "tracker.kind = deepsort\n"
        "tracker.nn_budget = 32\n"
        "tracker.nms_overlap = 0.7\n"
        "tracker.max_cos_dist = 0.2\n"
        "tracker.max_age = 2\n");
    const DeepSortConfig& dc = std::get<DeepSortConfig>(ds.tracker);
    CHECK(dc.nn_budget == 32);
    CHECK(dc.nms_overlap == 0.7);
    CHECK(dc.max_cos_dist == 0.2);
    CHECK(dc.sort.max_age == 2);

    // the kind may come after its parameters; the file is one document
    const AppConfig late = parse_config(
        "tracker.max_age = 7\n"
        "tracker.kind = sort\n");
    CHECK(std::get<SortConfig>(late.tracker).max_age == 7);
}

TEST_CASE("config text: everything wrong is refused with a line number") {
    const auto fails_at = [](const std::string& text, const char* needle) {
        const auto code = errc_of([&] { parse_config(text); });
        REQUIRE(code == Errc::bad_config);
        const std::string msg = error_text([&] { parse_config(text); });
        CHECK(msg.find(needle) != std::string::npos);
    };
    fails_at("tracker.kind = magic\n", "config:1");
    fails_at("wat\n", "key = value");
    fails_at("tracker.max_dist = \n", "empty value");
    fails_at("mystery.key = 1\n", "unknown key");
    fails_at("tracker.max_dist = 50\ntracker.max_dist = 60\n", "config:2");
    fails_at("tracker.max_dist = fast\n", "expected a number");
    fails_at("tracker.kind = sort\ntracker.max_dist = 50\n", "centroid");
    fails_at("tracker.nn_budget = 10\n", "deepsort");
    fails_at("tracker.kind = sort\ntracker.min_hits = 0\n", "min_hits");
    fails_at("reid.min_conf = 1.5\n", "[0, 1]");
    fails_at("reid.speed_limit = 0\n", "> 0");
    fails_at("eval.iou_min = 0\n", "(0, 1]");
}

TEST_CASE("config echo parses back to the same configuration") {
    const char* texts[] = {
        "",
        "tracker.kind = sort\ntracker.max_age = 4\n",
        "tracker.kind = deepsort\ntracker.max_cos_dist = 0.15\n"
        "reid.min_conf = 0.5\nreid.speed_limit = 22.5\neval.iou_min = 0.45\n",
        "tracker.max_dist = 123\nreid.model = m.rtsv\n",
    };
    for (const char* text : texts) {
        const AppConfig cfg = parse_config(text);
        std::string echoed;
        for (const auto& [k, v] : config_echo(cfg)) {
            echoed += k + " = " + v + "\n";
        }
        const AppConfig back = parse_config(echoed);
        CHECK(std::string(tracker_kind(back.tracker)) ==
              tracker_kind(cfg.tracker));
        CHECK(back.reid_model == cfg.reid_model);
        CHECK(back.reid_min_conf == cfg.reid_min_conf);
        CHECK(back.speed_limit == cfg.speed_limit);
        CHECK(back.eval_iou_min == cfg.eval_iou_min);
        if (const auto* a = std::get_if<CentroidConfig>(&cfg.tracker)) {
            CHECK(std::get<CentroidConfig>(back.tracker).max_dist ==
                  a->max_dist);
        }
        if (const auto* a = std::get_if<DeepSortConfig>(&cfg.tracker)) {
            const auto& b = std::get<DeepSortConfig>(back.tracker);
            CHECK(b.nn_budget == a->nn_budget);
            CHECK(b.max_cos_dist == a->max_cos_dist);
            CHECK(b.sort.max_age == a->sort.max_age);
        }
    }
}

TEST_CASE("read_config goes through the filesystem") {
    const std::string path = tmp_path("app.conf");
    spill(path, "tracker.kind = sort\n");
    CHECK(std::string(tracker_kind(read_config(path).tracker)) == "sort");
    CHECK(errc_of([&] { read_config(tmp_path("missing.conf")); }) ==
          Errc::io_error);
}

TEST_CASE("eval reports round-trip as JSON") {
    EvalReport r;
    r.total_gt = 1365;
    r.incorrect_id = 2;
    r.correct_pct = 99.85;
    r.reid_count = 7;
    r.reid_events = 5;
    r.fn = 1;
    r.fp = 4;
    r.per_frame = {{0, 3, 0, 0, 0}, {1, 3, 1, 1, 2}};
    const EvalReport back = eval_report_from_json(eval_report_to_json(r));
    CHECK(back.total_gt == r.total_gt);
    CHECK(back.incorrect_id == r.incorrect_id);
    CHECK(back.correct_pct == r.correct_pct);
    CHECK(back.reid_count == r.reid_count);
    CHECK(back.reid_events == r.reid_events);
    CHECK(back.fn == r.fn);
    CHECK(back.fp == r.fp);
    REQUIRE(back.per_frame.size() == 2);
    CHECK(back.per_frame[1].frame == 1);
    CHECK(back.per_frame[1].fp == 2);
}

TEST_CASE("report documents reproduce themselves exactly") {
    ReportDocument doc;
    doc.scenario = preset("normal_high");
    doc.config = {{"tracker.kind", "sort"}, {"eval.iou_min", "0.5"}};

    ResultRow row;
    row.tracker = "sort";
    row.params = {{"tracker.max_age", "1"}, {"tracker.min_hits", "3"}};
    row.det_fn = 2;
    row.det_fp = 1;
    row.tracker_only.total_gt = 1365;
    row.tracker_only.incorrect_id = 460;
    row.tracker_only.correct_pct = 66.30;
    row.tracker_only.per_frame = {{0, 3, 0, 0, 0}};
    row.reider = "svm-rbf";
    EvalReport with;
    with.total_gt = 1365;
    with.incorrect_id = 2;
    with.correct_pct = 99.85;
    with.reid_count = 9;
    with.per_frame = {{0, 3, 0, 0, 0}};
    row.with_reid = with;
    doc.rows.push_back(row);

    ResultRow bare;
    bare.tracker = "centroid";
    bare.params = {{"tracker.max_dist", "50"}};
    bare.tracker_only.total_gt = 10;
    bare.tracker_only.correct_pct = 100.0;
    doc.rows.push_back(bare);

    const std::string once = report_to_json(doc);
    const ReportDocument back = report_from_json(once);
    CHECK(report_to_json(back) == once); // lossless, byte for byte

    CHECK(back.version == 1);
    REQUIRE(back.scenario.has_value());
    CHECK(back.scenario->agents == 3);
    CHECK(back.config == doc.config);
    REQUIRE(back.rows.size() == 2);
    CHECK(back.rows[0].params == doc.rows[0].params);
    CHECK(back.rows[0].with_reid.has_value());
    CHECK(back.rows[0].with_reid->correct_pct == 99.85);
    CHECK(!back.rows[1].with_reid.has_value());
    CHECK(back.rows[1].reider.empty());

    const std::string path = tmp_path("report.json");
    write_report(doc, path);
    CHECK(slurp(path) == once);
    CHECK(report_to_json(read_report(path)) == once);

    CHECK(errc_of([] { report_from_json("{\"rows\": 3}"); }) ==
          Errc::parse_error);
}

TEST_CASE("the report table lines up the advertised columns") {
    ReportDocument doc;
    ResultRow row;
    row.tracker = "centroid";
    row.det_fn = 32;
    row.det_fp = 15;
    row.tracker_only.total_gt = 4190;
    row.tracker_only.incorrect_id = 3516;
    row.tracker_only.correct_pct = 16.08;
    row.reider = "svm-rbf";
    EvalReport with;
    with.total_gt = 4190;
    with.incorrect_id = 32;
    with.correct_pct = 99.22;
    with.reid_count = 46;
    row.with_reid = with;
    doc.rows.push_back(row);

    const std::string table = render_table(doc);
    CHECK(table.find("| DT") != std::string::npos);
    CHECK(table.find("| Tracker") != std::string::npos);
    CHECK(table.find("| ReID Count") != std::string::npos);
    CHECK(table.find("| Incorrect ID") != std::string::npos);
    CHECK(table.find("FN 32 FP 15") != std::string::npos);
    CHECK(table.find("centroid") != std::string::npos);
    CHECK(table.find("16.08%") != std::string::npos);
    CHECK(table.find("99.22%") != std::string::npos);
    CHECK(table.find("svm-rbf") != std::string::npos);
    CHECK(table.find("| 46") != std::string::npos);

    // a tracker-only row renders placeholders, not stale numbers
    ReportDocument bare;
    ResultRow solo;
    solo.tracker = "sort";
    solo.tracker_only.correct_pct = 73.47;
    bare.rows.push_back(solo);
    const std::string bare_table = render_table(bare);
    CHECK(bare_table.find("73.47%") != std::string::npos);
    CHECK(bare_table.find("svm-rbf") == std::string::npos);
}
