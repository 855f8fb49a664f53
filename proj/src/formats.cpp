// SPDX-License-Identifier: Apache-2.0
#include "reidtrack/formats.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

namespace reidtrack {

using ordered_json = nlohmann::ordered_json;

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

[[noreturn]] void parse_fail(const std::string& where, long line,
                             const std::string& why) {
    throw Error(Errc::parse_error,
                where + ":" + std::to_string(line) + ": " + why);
}

std::string printable(const std::string& path) {
    return path == "-" ? std::string("<stdin>") : path;
}

// stdin/stdout plumbing: "-" maps to the standard streams, anything else
// to a file.
class InFile {
public:
    explicit InFile(const std::string& path, bool binary = false) {
        if (path == "-") {
            stream_ = &std::cin;
            return;
        }
        file_.open(path, binary ? std::ios::in | std::ios::binary
                                : std::ios::in);
        if (!file_) {
            throw Error(Errc::io_error, "cannot open " + path);
        }
        stream_ = &file_;
    }
    std::istream& get() { return *stream_; }

private:
    std::ifstream file_;
    std::istream* stream_ = nullptr;
};

class OutFile {
public:
    explicit OutFile(const std::string& path, bool binary = false) {
        if (path == "-") {
            stream_ = &std::cout;
            return;
        }
        file_.open(path, binary ? std::ios::out | std::ios::binary
                                : std::ios::out);
        if (!file_) {
            throw Error(Errc::io_error, "cannot open " + path +
                                            " for writing");
        }
        stream_ = &file_;
    }
    std::ostream& get() { return *stream_; }
    void close(const std::string& path) {
        stream_->flush();
        if (!*stream_) {
            throw Error(Errc::io_error, "short write to " + path);
        }
        if (file_.is_open()) file_.close();
    }

private:
    std::ofstream file_;
    std::ostream* stream_ = nullptr;
};

// ---- little-endian binary primitives (model / sidecar files) ----

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& out, double v) {
    const auto u = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<unsigned char>(u >> (8 * i));
    }
    out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f32(std::ostream& out, float v) {
    const auto u = std::bit_cast<std::uint32_t>(v);
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) {
        b[i] = static_cast<unsigned char>(u >> (8 * i));
    }
    out.write(reinterpret_cast<const char*>(b), 4);
}

bool get_bytes(std::istream& in, unsigned char* dst, std::size_t n) {
    in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    return static_cast<std::size_t>(in.gcount()) == n;
}

bool get_u32(std::istream& in, std::uint32_t& v) {
    unsigned char b[4];
    if (!get_bytes(in, b, 4)) return false;
    v = static_cast<std::uint32_t>(b[0]) |
        (static_cast<std::uint32_t>(b[1]) << 8) |
        (static_cast<std::uint32_t>(b[2]) << 16) |
        (static_cast<std::uint32_t>(b[3]) << 24);
    return true;
}

bool get_f64(std::istream& in, double& v) {
    unsigned char b[8];
    if (!get_bytes(in, b, 8)) return false;
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) {
        u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    }
    v = std::bit_cast<double>(u);
    return true;
}

bool get_f32(std::istream& in, float& v) {
    std::uint32_t u;
    if (!get_u32(in, u)) return false;
    v = std::bit_cast<float>(u);
    return true;
}

constexpr char kSidecarMagic[4] = {'R', 'T', 'E', 'B'};
constexpr char kModelMagic[4] = {'R', 'T', 'S', 'V'};
constexpr std::uint32_t kModelVersion = 1;

// Lazily opened embedding sidecar; vectors fetched by byte offset.
class SidecarReader {
public:
    explicit SidecarReader(std::string base_path)
        : path_(std::move(base_path)) {}

    Embedding fetch(std::uint64_t offset, const std::string& where,
                    long line) {
        if (!opened_) open(where, line);
        file_.clear();
        file_.seekg(static_cast<std::streamoff>(offset));
        Embedding e(dim_);
        for (std::size_t i = 0; i < dim_; ++i) {
            float f;
            if (!get_f32(file_, f)) {
                parse_fail(where, line,
                           "embedding sidecar " + path_ +
                               " ends inside the vector at offset " +
                               std::to_string(offset));
            }
            e[i] = static_cast<double>(f);
        }
        return e;
    }

private:
    void open(const std::string& where, long line) {
        if (path_ == "-") {
            parse_fail(where, line,
                       "emb_ref needs a real file (stdin has no sidecar)");
        }
        file_.open(path_ + ".emb", std::ios::in | std::ios::binary);
        if (!file_) {
            throw Error(Errc::io_error, "cannot open " + path_ + ".emb");
        }
        char magic[4];
        if (!get_bytes(file_, reinterpret_cast<unsigned char*>(magic), 4) ||
            std::memcmp(magic, kSidecarMagic, 4) != 0) {
            parse_fail(path_ + ".emb", 0, "not an embedding sidecar");
        }
        std::uint32_t d;
        if (!get_u32(file_, d) || d == 0) {
            parse_fail(path_ + ".emb", 0, "bad sidecar dimension");
        }
        dim_ = d;
        opened_ = true;
    }

    std::string path_;
    std::ifstream file_;
    std::size_t dim_ = 0;
    bool opened_ = false;
};

double want_number(const ordered_json& j, const char* key,
                   const std::string& where, long line) {
    if (!j.is_number()) {
        parse_fail(where, line, std::string(key) + " must be a number");
    }
    return j.get<double>();
}

BBox parse_box(const ordered_json& j, const std::string& where, long line) {
    if (!j.is_array() || j.size() != 4) {
        parse_fail(where, line, "box must be [x, y, w, h]");
    }
    BBox b;
    b.x = want_number(j[0], "box[0]", where, line);
    b.y = want_number(j[1], "box[1]", where, line);
    b.w = want_number(j[2], "box[2]", where, line);
    b.h = want_number(j[3], "box[3]", where, line);
    return b;
}

ordered_json box_json(const BBox& b) {
    return ordered_json::array({b.x, b.y, b.w, b.h});
}

Embedding parse_embedding(const ordered_json& j, const std::string& where,
                          long line) {
    if (!j.is_array() || j.empty()) {
        parse_fail(where, line, "emb must be a non-empty array");
    }
    Embedding e;
    e.reserve(j.size());
    for (const auto& v : j) {
        e.push_back(want_number(v, "emb[]", where, line));
    }
    return e;
}

ordered_json parse_line(const std::string& text, const std::string& where,
                        long line) {
    try {
        return ordered_json::parse(text);
    } catch (const ordered_json::exception& ex) {
        parse_fail(where, line, ex.what());
    }
}

FrameObservations parse_frame_obs(const ordered_json& j,
                                  const std::string& where, long line,
                                  SidecarReader* sidecar) {
    if (!j.is_object() || !j.contains("frame") || !j.contains("dets")) {
        parse_fail(where, line, "expected {\"frame\": .., \"dets\": [..]}");
    }
    if (!j["frame"].is_number_integer()) {
        parse_fail(where, line, "frame must be an integer");
    }
    FrameObservations obs;
    obs.frame = j["frame"].get<std::int64_t>();
    if (!j["dets"].is_array()) {
        parse_fail(where, line, "dets must be an array");
    }
    for (const auto& dj : j["dets"]) {
        if (!dj.is_object() || !dj.contains("box")) {
            parse_fail(where, line, "each det needs a box");
        }
        Detection d;
        d.frame = obs.frame;
        d.bbox = parse_box(dj["box"], where, line);
        if (dj.contains("conf")) {
            d.conf = want_number(dj["conf"], "conf", where, line);
        }
        if (dj.contains("kps")) {
            const auto& kj = dj["kps"];
            if (!kj.is_array() || kj.size() != kKeypointCount) {
                parse_fail(where, line,
                           "kps must hold exactly " +
                               std::to_string(kKeypointCount) +
                               " [x, y, c] triples");
            }
            Keypoints kps;
            for (std::size_t i = 0; i < kKeypointCount; ++i) {
                const auto& pj = kj[i];
                if (!pj.is_array() || pj.size() != 3) {
                    parse_fail(where, line, "kps entries are [x, y, c]");
                }
                kps.points[i].x = want_number(pj[0], "kps", where, line);
                kps.points[i].y = want_number(pj[1], "kps", where, line);
                kps.points[i].conf = want_number(pj[2], "kps", where, line);
            }
            d.keypoints = kps;
        }
        if (dj.contains("emb") && dj.contains("emb_ref")) {
            parse_fail(where, line, "det has both emb and emb_ref");
        }
        if (dj.contains("emb")) {
            d.embedding = parse_embedding(dj["emb"], where, line);
        } else if (dj.contains("emb_ref")) {
            if (!dj["emb_ref"].is_number_unsigned()) {
                parse_fail(where, line, "emb_ref must be a byte offset");
            }
            if (!sidecar) {
                parse_fail(where, line,
                           "emb_ref is not available on single lines");
            }
            d.embedding = sidecar->fetch(dj["emb_ref"].get<std::uint64_t>(),
                                         where, line);
        }
        obs.detections.push_back(std::move(d));
    }
    return obs;
}

ordered_json frame_obs_json(const FrameObservations& obs) {
    ordered_json j;
    j["frame"] = obs.frame;
    auto& dets = j["dets"] = ordered_json::array();
    for (const auto& d : obs.detections) {
        ordered_json dj;
        dj["box"] = box_json(d.bbox);
        dj["conf"] = d.conf;
        if (d.keypoints) {
            auto& kj = dj["kps"] = ordered_json::array();
            for (const auto& p : d.keypoints->points) {
                kj.push_back(ordered_json::array({p.x, p.y, p.conf}));
            }
        }
        if (d.embedding) dj["emb"] = *d.embedding;
        dets.push_back(std::move(dj));
    }
    return j;
}

} // namespace

// ---------------------------------------------------------------------------
// Detections

std::vector<FrameObservations> read_detections(const std::string& path) {
    InFile in(path);
    const std::string where = printable(path);
    SidecarReader sidecar(path);

    std::vector<FrameObservations> stream;
    std::optional<std::size_t> dim;
    std::string text;
    long line = 0;
    while (std::getline(in.get(), text)) {
        ++line;
        if (text.empty()) continue;
        FrameObservations obs = parse_frame_obs(parse_line(text, where, line),
                                                where, line, &sidecar);
        if (!stream.empty() && obs.frame <= stream.back().frame) {
            throw Error(Errc::non_monotonic_frame,
                        where + ":" + std::to_string(line) + ": frame " +
                            std::to_string(obs.frame) +
                            " does not increase on the previous line");
        }
        for (const auto& d : obs.detections) {
            if (!d.embedding) continue;
            if (dim && d.embedding->size() != *dim) {
                throw Error(Errc::embedding_dim_mismatch,
                            where + ":" + std::to_string(line) +
                                ": embedding of dimension " +
                                std::to_string(d.embedding->size()) +
                                " in a stream of dimension " +
                                std::to_string(*dim));
            }
            dim = d.embedding->size();
        }
        stream.push_back(std::move(obs));
    }
    return stream;
}

FrameObservations detections_line_parse(const std::string& text) {
    return parse_frame_obs(parse_line(text, "<line>", 1), "<line>", 1,
                           nullptr);
}

std::string detections_line_dump(const FrameObservations& obs) {
    return frame_obs_json(obs).dump();
}

void write_detections(const std::vector<FrameObservations>& stream,
                      const std::string& path, EmbeddingStorage storage) {
    std::optional<std::size_t> dim;
    for (const auto& obs : stream) {
        for (const auto& d : obs.detections) {
            if (!d.embedding) continue;
            if (dim && d.embedding->size() != *dim) {
                throw Error(Errc::embedding_dim_mismatch,
                            "stream mixes embedding dimensions " +
                                std::to_string(*dim) + " and " +
                                std::to_string(d.embedding->size()));
            }
            dim = d.embedding->size();
        }
    }

    std::ofstream sidecar;
    std::uint64_t next_offset = 8;
    if (storage == EmbeddingStorage::sidecar) {
        if (path == "-") {
            throw Error(Errc::io_error,
                        "sidecar embeddings need a real output file");
        }
        sidecar.open(path + ".emb", std::ios::out | std::ios::binary);
        if (!sidecar) {
            throw Error(Errc::io_error,
                        "cannot open " + path + ".emb for writing");
        }
        sidecar.write(kSidecarMagic, 4);
        put_u32(sidecar, static_cast<std::uint32_t>(dim.value_or(0)));
    }

    OutFile out(path);
    for (const auto& obs : stream) {
        ordered_json j;
        j["frame"] = obs.frame;
        auto& dets = j["dets"] = ordered_json::array();
        for (const auto& d : obs.detections) {
            ordered_json dj;
            dj["box"] = box_json(d.bbox);
            dj["conf"] = d.conf;
            if (d.keypoints) {
                auto& kj = dj["kps"] = ordered_json::array();
                for (const auto& p : d.keypoints->points) {
                    kj.push_back(ordered_json::array({p.x, p.y, p.conf}));
                }
            }
            if (d.embedding) {
                if (storage == EmbeddingStorage::inline_json) {
                    dj["emb"] = *d.embedding;
                } else {
                    dj["emb_ref"] = next_offset;
                    for (const double v : *d.embedding) {
                        put_f32(sidecar, static_cast<float>(v));
                    }
                    next_offset += 4 * d.embedding->size();
                }
            }
            dets.push_back(std::move(dj));
        }
        out.get() << j.dump() << '\n';
    }
    if (sidecar.is_open()) {
        sidecar.flush();
        if (!sidecar) {
            throw Error(Errc::io_error, "short write to " + path + ".emb");
        }
    }
    out.close(path);
}

// ---------------------------------------------------------------------------
// Ground truth

GroundTruth read_ground_truth(const std::string& path) {
    InFile in(path);
    const std::string where = printable(path);
    std::string text;
    long line = 0;

    if (!std::getline(in.get(), text)) {
        parse_fail(where, 1, "empty ground-truth file");
    }
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text != "frame,label,x,y,w,h") {
        parse_fail(where, 1, "expected header frame,label,x,y,w,h");
    }

    GroundTruth gt;
    while (std::getline(in.get(), text)) {
        ++line;
        if (!text.empty() && text.back() == '\r') text.pop_back();
        if (text.empty()) continue;

        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = text.find(',', start);
            fields.push_back(text.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (fields.size() != 6) {
            parse_fail(where, line, "expected 6 comma-separated fields");
        }

        long frame;
        {
            const auto& s = fields[0];
            const auto res =
                std::from_chars(s.data(), s.data() + s.size(), frame);
            if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
                parse_fail(where, line, "bad frame number '" + s + "'");
            }
        }
        if (fields[1].empty()) {
            parse_fail(where, line, "empty label");
        }
        double vals[4];
        for (int i = 0; i < 4; ++i) {
            const auto& s = fields[i + 2];
            const auto res =
                std::from_chars(s.data(), s.data() + s.size(), vals[i]);
            if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
                parse_fail(where, line, "bad number '" + s + "'");
            }
        }

        auto& entries = gt.frames[frame];
        for (const auto& e : entries) {
            if (e.label == fields[1]) {
                throw Error(Errc::duplicate_label_in_frame,
                            where + ":" + std::to_string(line) + ": label " +
                                fields[1] + " listed twice in frame " +
                                std::to_string(frame));
            }
        }
        entries.push_back(
            {fields[1], BBox{vals[0], vals[1], vals[2], vals[3]}});
    }
    return gt;
}

void write_ground_truth(const GroundTruth& gt, const std::string& path) {
    OutFile out(path);
    out.get() << "frame,label,x,y,w,h\n";
    for (const auto& [frame, entries] : gt.frames) {
        for (const auto& e : entries) {
            out.get() << frame << ',' << e.label << ','
                      << format_double(e.bbox.x) << ','
                      << format_double(e.bbox.y) << ','
                      << format_double(e.bbox.w) << ','
                      << format_double(e.bbox.h) << '\n';
        }
    }
    out.close(path);
}

// ---------------------------------------------------------------------------
// Galleries

std::vector<GallerySample> read_gallery(const std::string& path) {
    InFile in(path);
    const std::string where = printable(path);
    std::vector<GallerySample> gallery;
    std::string text;
    long line = 0;
    while (std::getline(in.get(), text)) {
        ++line;
        if (text.empty()) continue;
        const ordered_json j = parse_line(text, where, line);
        if (!j.is_object() || !j.contains("label") || !j.contains("emb") ||
            !j["label"].is_string()) {
            parse_fail(where, line,
                       "expected {\"label\": .., \"emb\": [..]}");
        }
        GallerySample s;
        s.label = j["label"].get<std::string>();
        if (s.label.empty()) {
            parse_fail(where, line, "empty label");
        }
        s.embedding = parse_embedding(j["emb"], where, line);
        gallery.push_back(std::move(s));
    }
    return gallery;
}

void write_gallery(const std::vector<GallerySample>& gallery,
                   const std::string& path) {
    OutFile out(path);
    for (const auto& s : gallery) {
        ordered_json j;
        j["label"] = s.label;
        j["emb"] = s.embedding;
        out.get() << j.dump() << '\n';
    }
    out.close(path);
}

// ---------------------------------------------------------------------------
// Models

RbfSvmModel read_model(const std::string& path) {
    InFile in(path, /*binary=*/true);
    std::istream& f = in.get();

    char magic[4];
    if (!get_bytes(f, reinterpret_cast<unsigned char*>(magic), 4) ||
        std::memcmp(magic, kModelMagic, 4) != 0) {
        throw Error(Errc::parse_error,
                    printable(path) + ": not a classifier model file");
    }
    std::uint32_t version;
    if (!get_u32(f, version)) {
        throw Error(Errc::parse_error, printable(path) + ": truncated model");
    }
    if (version != kModelVersion) {
        throw Error(Errc::version_mismatch,
                    printable(path) + ": model format version " +
                        std::to_string(version) + ", expected " +
                        std::to_string(kModelVersion));
    }

    const auto need = [&](bool ok) {
        if (!ok) {
            throw Error(Errc::parse_error,
                        printable(path) + ": truncated model");
        }
    };

    std::uint32_t dim = 0, n_classes = 0;
    need(get_u32(f, dim));
    need(get_u32(f, n_classes));
    RbfSvmModel m;
    m.dim = dim;
    need(get_f64(f, m.gamma));
    need(get_f64(f, m.c));
    need(get_f64(f, m.min_conf));

    for (std::uint32_t ci = 0; ci < n_classes; ++ci) {
        std::uint32_t label_len = 0;
        need(get_u32(f, label_len));
        std::string label(label_len, '\0');
        need(get_bytes(f, reinterpret_cast<unsigned char*>(label.data()),
                       label_len));
        BinaryMachine machine;
        need(get_f64(f, machine.bias));
        std::uint32_t n_sv = 0;
        need(get_u32(f, n_sv));
        machine.support_vectors.resize(n_sv, Embedding(dim));
        for (auto& sv : machine.support_vectors) {
            for (auto& v : sv) need(get_f64(f, v));
        }
        machine.dual_coefs.resize(n_sv);
        for (auto& v : machine.dual_coefs) need(get_f64(f, v));
        m.classes.push_back(std::move(label));
        m.machines.push_back(std::move(machine));
    }
    return m;
}

void write_model(const RbfSvmModel& model, const std::string& path) {
    OutFile out(path, /*binary=*/true);
    std::ostream& f = out.get();
    f.write(kModelMagic, 4);
    put_u32(f, kModelVersion);
    put_u32(f, static_cast<std::uint32_t>(model.dim));
    put_u32(f, static_cast<std::uint32_t>(model.classes.size()));
    put_f64(f, model.gamma);
    put_f64(f, model.c);
    put_f64(f, model.min_conf);
    for (std::size_t ci = 0; ci < model.classes.size(); ++ci) {
        const auto& label = model.classes[ci];
        const auto& machine = model.machines[ci];
        put_u32(f, static_cast<std::uint32_t>(label.size()));
        f.write(label.data(), static_cast<std::streamsize>(label.size()));
        put_f64(f, machine.bias);
        put_u32(f, static_cast<std::uint32_t>(machine.support_vectors.size()));
        for (const auto& sv : machine.support_vectors) {
            for (const double v : sv) put_f64(f, v);
        }
        for (const double v : machine.dual_coefs) put_f64(f, v);
    }
    out.close(path);
}

// ---------------------------------------------------------------------------
// Tracker output

namespace {

ordered_json identity_json(const Identity& id) {
    if (id.is_known()) return id.label();
    return nullptr;
}

Identity identity_from_json(const ordered_json& j, const std::string& where,
                            long line) {
    if (j.is_null()) return Identity::unknown();
    if (!j.is_string()) parse_fail(where, line, "label must be string|null");
    const auto s = j.get<std::string>();
    if (s.empty()) return Identity::unknown();
    return Identity::known(s);
}

ReidRule rule_from_name(const std::string& name, const std::string& where,
                        long line) {
    for (const ReidRule r : {ReidRule::new_or_unknown, ReidRule::duplicate_id,
                             ReidRule::speed_limit}) {
        if (name == reid_rule_name(r)) return r;
    }
    parse_fail(where, line, "unknown reid rule '" + name + "'");
}

} // namespace

void write_tracks(const TrackOutput& output, const std::string& path) {
    OutFile out(path);
    {
        ordered_json meta;
        meta["type"] = "meta";
        meta["format"] = "reidtrack-tracks";
        meta["version"] = 1;
        out.get() << meta.dump() << '\n';
    }

    std::size_t event_idx = 0;
    for (const auto& frame : output.frames) {
        ordered_json fj;
        fj["type"] = "frame";
        fj["frame"] = frame.frame;
        auto& entries = fj["entries"] = ordered_json::array();
        for (const auto& e : frame.entries) {
            ordered_json ej;
            ej["track"] = e.track_id;
            ej["label"] = identity_json(e.identity);
            ej["box"] = box_json(e.bbox);
            entries.push_back(std::move(ej));
        }
        out.get() << fj.dump() << '\n';

        while (event_idx < output.events.size() &&
               output.events[event_idx].frame == frame.frame) {
            const auto& ev = output.events[event_idx++];
            ordered_json evj;
            evj["type"] = "event";
            evj["frame"] = ev.frame;
            evj["rule"] = reid_rule_name(ev.rule);
            evj["affected"] = ev.affected;
            auto& outcomes = evj["outcomes"] = ordered_json::array();
            for (const auto& o : ev.outcomes) {
                ordered_json oj;
                oj["track"] = o.track_id;
                oj["old"] = identity_json(o.old_identity);
                oj["new"] = identity_json(o.new_identity);
                oj["conf"] = o.confidence;
                oj["classified"] = o.classified;
                outcomes.push_back(std::move(oj));
            }
            out.get() << evj.dump() << '\n';
        }
    }

    ordered_json summary;
    summary["type"] = "summary";
    summary["frames"] = output.frames.size();
    summary["events"] = output.events.size();
    summary["reid_count"] = output.reid_count;
    out.get() << summary.dump() << '\n';
    out.close(path);
}

TrackOutput read_tracks(const std::string& path) {
    InFile in(path);
    const std::string where = printable(path);
    TrackOutput output;
    bool saw_meta = false, saw_summary = false;
    std::string text;
    long line = 0;
    while (std::getline(in.get(), text)) {
        ++line;
        if (text.empty()) continue;
        const ordered_json j = parse_line(text, where, line);
        if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
            parse_fail(where, line, "expected a typed JSON line");
        }
        const auto type = j["type"].get<std::string>();
        if (type == "meta") {
            if (!j.contains("format") ||
                j["format"] != "reidtrack-tracks") {
                parse_fail(where, line, "not a tracks file");
            }
            if (!j.contains("version") || j["version"] != 1) {
                throw Error(Errc::version_mismatch,
                            where + ":" + std::to_string(line) +
                                ": unsupported tracks version");
            }
            saw_meta = true;
        } else if (type == "frame") {
            FrameOutput frame;
            frame.frame = j.at("frame").get<long>();
            if (!output.frames.empty() &&
                frame.frame <= output.frames.back().frame) {
                throw Error(Errc::non_monotonic_frame,
                            where + ":" + std::to_string(line) +
                                ": frames out of order");
            }
            for (const auto& ej : j.at("entries")) {
                FrameEntry e;
                e.track_id = ej.at("track").get<std::int64_t>();
                e.identity = identity_from_json(ej.at("label"), where, line);
                e.bbox = parse_box(ej.at("box"), where, line);
                frame.entries.push_back(std::move(e));
            }
            output.frames.push_back(std::move(frame));
        } else if (type == "event") {
            ReidEvent ev;
            ev.frame = j.at("frame").get<long>();
            ev.rule = rule_from_name(j.at("rule").get<std::string>(), where,
                                     line);
            ev.affected = j.at("affected").get<std::vector<std::int64_t>>();
            for (const auto& oj : j.at("outcomes")) {
                ReidOutcome o;
                o.track_id = oj.at("track").get<std::int64_t>();
                o.old_identity = identity_from_json(oj.at("old"), where, line);
                o.new_identity = identity_from_json(oj.at("new"), where, line);
                o.confidence = oj.at("conf").get<double>();
                o.classified = oj.at("classified").get<bool>();
                ev.outcomes.push_back(std::move(o));
            }
            output.events.push_back(std::move(ev));
        } else if (type == "summary") {
            output.reid_count = j.at("reid_count").get<long>();
            saw_summary = true;
        } else {
            parse_fail(where, line, "unknown line type '" + type + "'");
        }
    }
    if (!saw_meta || !saw_summary) {
        parse_fail(where, line, "tracks file missing meta or summary line");
    }
    return output;
}

// ---------------------------------------------------------------------------
// Scenario specs

std::string scenario_to_json(const ScenarioSpec& spec) {
    ordered_json j;
    j["agents"] = spec.agents;
    j["frames"] = spec.frames;
    j["width"] = spec.width;
    j["height"] = spec.height;
    auto& crossings = j["crossings"] = ordered_json::array();
    for (const auto& c : spec.crossings) {
        ordered_json cj;
        cj["agents"] = c.agents;
        cj["span"] = ordered_json::array({c.span_begin, c.span_end});
        cj["occlude_frames"] = c.occlude_frames;
        crossings.push_back(std::move(cj));
    }
    auto& exits = j["exits"] = ordered_json::array();
    for (const auto& e : spec.exits) {
        ordered_json ej;
        ej["agent"] = e.agent;
        ej["exit"] = e.exit_frame;
        ej["reenter"] = e.reenter_frame;
        exits.push_back(std::move(ej));
    }
    j["det_noise"] = spec.det_noise;
    j["drop_rate"] = spec.drop_rate;
    j["fp_rate"] = spec.fp_rate;
    j["emb"] = {{"dim", spec.emb.dim},
                {"class_sep", spec.emb.class_sep},
                {"noise_std", spec.emb.noise_std}};
    j["seed"] = spec.seed;
    j["gallery_per_agent"] = spec.gallery_per_agent;
    return j.dump();
}

ScenarioSpec scenario_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const ordered_json::exception& ex) {
        throw Error(Errc::parse_error,
                    std::string("scenario spec: ") + ex.what());
    }
    if (!j.is_object()) {
        throw Error(Errc::invalid_spec, "scenario spec must be an object");
    }

    ScenarioSpec spec;
    if (j.contains("preset")) {
        spec = preset(j["preset"].get<std::string>());
    }

    static const std::vector<std::string> known = {
        "preset",    "agents", "frames",  "width",
        "height",    "crossings", "exits",   "det_noise",
        "drop_rate", "fp_rate", "emb",     "seed",
        "gallery_per_agent"};
    for (const auto& [key, value] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw Error(Errc::invalid_spec,
                        "scenario spec: unknown field '" + key + "'");
        }
    }

    try {
        if (j.contains("agents")) spec.agents = j["agents"].get<std::size_t>();
        if (j.contains("frames")) spec.frames = j["frames"].get<long>();
        if (j.contains("width")) spec.width = j["width"].get<double>();
        if (j.contains("height")) spec.height = j["height"].get<double>();
        if (j.contains("crossings")) {
            spec.crossings.clear();
            for (const auto& cj : j["crossings"]) {
                CrossingEvent c;
                c.agents = cj.at("agents").get<std::vector<std::size_t>>();
                c.span_begin = cj.at("span").at(0).get<long>();
                c.span_end = cj.at("span").at(1).get<long>();
                if (cj.contains("occlude_frames")) {
                    c.occlude_frames = cj["occlude_frames"].get<long>();
                }
                spec.crossings.push_back(std::move(c));
            }
        }
        if (j.contains("exits")) {
            spec.exits.clear();
            for (const auto& ej : j["exits"]) {
                ExitReenterEvent e;
                e.agent = ej.at("agent").get<std::size_t>();
                e.exit_frame = ej.at("exit").get<long>();
                e.reenter_frame = ej.at("reenter").get<long>();
                spec.exits.push_back(e);
            }
        }
        if (j.contains("det_noise")) {
            spec.det_noise = j["det_noise"].get<double>();
        }
        if (j.contains("drop_rate")) {
            spec.drop_rate = j["drop_rate"].get<double>();
        }
        if (j.contains("fp_rate")) spec.fp_rate = j["fp_rate"].get<double>();
        if (j.contains("emb")) {
            const auto& em = j["emb"];
            if (em.contains("dim")) {
                spec.emb.dim = em["dim"].get<std::size_t>();
            }
            if (em.contains("class_sep")) {
                spec.emb.class_sep = em["class_sep"].get<double>();
            }
            if (em.contains("noise_std")) {
                spec.emb.noise_std = em["noise_std"].get<double>();
            }
        }
        if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("gallery_per_agent")) {
            spec.gallery_per_agent = j["gallery_per_agent"].get<std::size_t>();
        }
    } catch (const ordered_json::exception& ex) {
        throw Error(Errc::invalid_spec,
                    std::string("scenario spec: ") + ex.what());
    }
    return spec;
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

[[noreturn]] void config_fail(long line, const std::string& why) {
    throw Error(Errc::bad_config,
                "config:" + std::to_string(line) + ": " + why);
}

double config_double(const std::string& v, long line) {
    double out;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
        config_fail(line, "expected a number, got '" + v + "'");
    }
    return out;
}

long config_long(const std::string& v, long line) {
    long out;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
        config_fail(line, "expected an integer, got '" + v + "'");
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

} // namespace

AppConfig parse_config(const std::string& text) {
    struct Entry {
        std::string key, value;
        long line;
    };
    std::vector<Entry> entries;
    {
        std::istringstream in(text);
        std::string raw;
        long line = 0;
        while (std::getline(in, raw)) {
            ++line;
            const auto hash = raw.find('#');
            if (hash != std::string::npos) raw.erase(hash);
            raw = trim(raw);
            if (raw.empty()) continue;
            const auto eq = raw.find('=');
            if (eq == std::string::npos) {
                config_fail(line, "expected key = value");
            }
            Entry e{trim(raw.substr(0, eq)), trim(raw.substr(eq + 1)), line};
            if (e.key.empty()) config_fail(line, "empty key");
            if (e.value.empty()) config_fail(line, "empty value");
            for (const auto& prev : entries) {
                if (prev.key == e.key) {
                    config_fail(line, "duplicate key '" + e.key + "'");
                }
            }
            entries.push_back(std::move(e));
        }
    }

    std::string kind = "centroid";
    for (const auto& e : entries) {
        if (e.key == "tracker.kind") {
            if (e.value != "centroid" && e.value != "sort" &&
                e.value != "deepsort") {
                config_fail(e.line, "tracker.kind must be centroid, sort or "
                                    "deepsort");
            }
            kind = e.value;
        }
    }

    AppConfig cfg;
    if (kind == "centroid") {
        cfg.tracker = CentroidConfig{};
    } else if (kind == "sort") {
        cfg.tracker = SortConfig{};
    } else {
        cfg.tracker = DeepSortConfig{};
    }

    const auto sort_part = [&]() -> SortConfig* {
        if (auto* s = std::get_if<SortConfig>(&cfg.tracker)) return s;
        if (auto* d = std::get_if<DeepSortConfig>(&cfg.tracker)) {
            return &d->sort;
        }
        return nullptr;
    };

    for (const auto& e : entries) {
        if (e.key == "tracker.kind") {
            continue;
        } else if (e.key == "tracker.max_dist") {
            auto* c = std::get_if<CentroidConfig>(&cfg.tracker);
            if (!c) {
                config_fail(e.line, "tracker.max_dist applies to the "
                                    "centroid tracker only");
            }
            c->max_dist = config_double(e.value, e.line);
            if (c->max_dist <= 0) config_fail(e.line, "max_dist must be > 0");
        } else if (e.key == "tracker.max_age" ||
                   e.key == "tracker.min_hits" ||
                   e.key == "tracker.iou_thresh") {
            auto* s = sort_part();
            if (!s) {
                config_fail(e.line, e.key + " applies to the sort and "
                                            "deepsort trackers only");
            }
            if (e.key == "tracker.max_age") {
                s->max_age = config_long(e.value, e.line);
                if (s->max_age < 0) config_fail(e.line, "max_age must be >= 0");
            } else if (e.key == "tracker.min_hits") {
                s->min_hits = config_long(e.value, e.line);
                if (s->min_hits < 1) {
                    config_fail(e.line, "min_hits must be >= 1");
                }
            } else {
                s->iou_thresh = config_double(e.value, e.line);
                if (s->iou_thresh < 0 || s->iou_thresh > 1) {
                    config_fail(e.line, "iou_thresh must be in [0, 1]");
                }
            }
        } else if (e.key == "tracker.nn_budget" ||
                   e.key == "tracker.nms_overlap" ||
                   e.key == "tracker.max_cos_dist") {
            auto* d = std::get_if<DeepSortConfig>(&cfg.tracker);
            if (!d) {
                config_fail(e.line,
                            e.key + " applies to the deepsort tracker only");
            }
            if (e.key == "tracker.nn_budget") {
                const long b = config_long(e.value, e.line);
                if (b < 1) config_fail(e.line, "nn_budget must be >= 1");
                d->nn_budget = static_cast<std::size_t>(b);
            } else if (e.key == "tracker.nms_overlap") {
                d->nms_overlap = config_double(e.value, e.line);
                if (d->nms_overlap < 0 || d->nms_overlap > 1) {
                    config_fail(e.line, "nms_overlap must be in [0, 1]");
                }
            } else {
                d->max_cos_dist = config_double(e.value, e.line);
                if (d->max_cos_dist <= 0) {
                    config_fail(e.line, "max_cos_dist must be > 0");
                }
            }
        } else if (e.key == "reid.model") {
            cfg.reid_model = e.value;
        } else if (e.key == "reid.min_conf") {
            const double v = config_double(e.value, e.line);
            if (v < 0 || v > 1) {
                config_fail(e.line, "reid.min_conf must be in [0, 1]");
            }
            cfg.reid_min_conf = v;
        } else if (e.key == "reid.speed_limit") {
            const double v = config_double(e.value, e.line);
            if (v <= 0) {
                config_fail(e.line, "reid.speed_limit must be > 0");
            }
            cfg.speed_limit = v;
        } else if (e.key == "eval.iou_min") {
            const double v = config_double(e.value, e.line);
            if (v <= 0 || v > 1) {
                config_fail(e.line, "eval.iou_min must be in (0, 1]");
            }
            cfg.eval_iou_min = v;
        } else {
            config_fail(e.line, "unknown key '" + e.key + "'");
        }
    }
    return cfg;
}

AppConfig read_config(const std::string& path) {
    InFile in(path);
    std::ostringstream buf;
    buf << in.get().rdbuf();
    return parse_config(buf.str());
}

const char* tracker_kind(const TrackerConfig& cfg) {
    return std::visit(
        [](const auto& c) -> const char* {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, CentroidConfig>) {
                return "centroid";
            } else if constexpr (std::is_same_v<T, SortConfig>) {
                return "sort";
            } else {
                return "deepsort";
            }
        },
        cfg);
}

std::vector<std::pair<std::string, std::string>> config_echo(
    const AppConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("tracker.kind", tracker_kind(cfg.tracker));
    if (const auto* c = std::get_if<CentroidConfig>(&cfg.tracker)) {
        kv.emplace_back("tracker.max_dist", format_double(c->max_dist));
    } else {
        const SortConfig& s =
            std::holds_alternative<SortConfig>(cfg.tracker)
                ? std::get<SortConfig>(cfg.tracker)
                : std::get<DeepSortConfig>(cfg.tracker).sort;
        kv.emplace_back("tracker.max_age", std::to_string(s.max_age));
        kv.emplace_back("tracker.min_hits", std::to_string(s.min_hits));
        kv.emplace_back("tracker.iou_thresh", format_double(s.iou_thresh));
        if (const auto* d = std::get_if<DeepSortConfig>(&cfg.tracker)) {
            kv.emplace_back("tracker.nn_budget",
                            std::to_string(d->nn_budget));
            kv.emplace_back("tracker.nms_overlap",
                            format_double(d->nms_overlap));
            kv.emplace_back("tracker.max_cos_dist",
                            format_double(d->max_cos_dist));
        }
    }
    if (cfg.reid_model) kv.emplace_back("reid.model", *cfg.reid_model);
    if (cfg.reid_min_conf) {
        kv.emplace_back("reid.min_conf", format_double(*cfg.reid_min_conf));
    }
    if (cfg.speed_limit) {
        kv.emplace_back("reid.speed_limit", format_double(*cfg.speed_limit));
    }
    kv.emplace_back("eval.iou_min", format_double(cfg.eval_iou_min));
    return kv;
}

PipelineConfig to_pipeline_config(const AppConfig& cfg) {
    PipelineConfig p;
    p.tracker = cfg.tracker;
    p.reid_min_conf = cfg.reid_min_conf;
    p.speed_limit = cfg.speed_limit;
    return p;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

ordered_json eval_json(const EvalReport& r) {
    ordered_json j;
    j["total_gt"] = r.total_gt;
    j["incorrect_id"] = r.incorrect_id;
    j["correct_pct"] = r.correct_pct;
    j["reid_count"] = r.reid_count;
    j["reid_events"] = r.reid_events;
    j["fn"] = r.fn;
    j["fp"] = r.fp;
    auto& pf = j["per_frame"] = ordered_json::array();
    for (const auto& f : r.per_frame) {
        pf.push_back(ordered_json::array(
            {f.frame, f.gt_count, f.incorrect, f.fn, f.fp}));
    }
    return j;
}

EvalReport eval_from_json(const ordered_json& j) {
    EvalReport r;
    r.total_gt = j.at("total_gt").get<std::size_t>();
    r.incorrect_id = j.at("incorrect_id").get<std::size_t>();
    r.correct_pct = j.at("correct_pct").get<double>();
    r.reid_count = j.at("reid_count").get<long>();
    r.reid_events = j.at("reid_events").get<std::size_t>();
    r.fn = j.at("fn").get<std::size_t>();
    r.fp = j.at("fp").get<std::size_t>();
    for (const auto& fj : j.at("per_frame")) {
        FrameScore f;
        f.frame = fj.at(0).get<long>();
        f.gt_count = fj.at(1).get<std::size_t>();
        f.incorrect = fj.at(2).get<std::size_t>();
        f.fn = fj.at(3).get<std::size_t>();
        f.fp = fj.at(4).get<std::size_t>();
        r.per_frame.push_back(f);
    }
    return r;
}

std::string pct_text(double pct) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", pct);
    return buf;
}

} // namespace

std::string eval_report_to_json(const EvalReport& r) {
    return eval_json(r).dump(2) + "\n";
}

EvalReport eval_report_from_json(const std::string& text) {
    try {
        return eval_from_json(ordered_json::parse(text));
    } catch (const ordered_json::exception& ex) {
        throw Error(Errc::parse_error,
                    std::string("evaluation: ") + ex.what());
    }
}

std::string report_to_json(const ReportDocument& report) {
    ordered_json j;
    j["version"] = report.version;
    if (report.scenario) {
        j["scenario"] = ordered_json::parse(scenario_to_json(*report.scenario));
    }
    auto& cj = j["config"] = ordered_json::object();
    for (const auto& [k, v] : report.config) cj[k] = v;
    auto& rows = j["results"] = ordered_json::array();
    for (const auto& row : report.rows) {
        ordered_json rj;
        rj["tracker"] = row.tracker;
        auto& pj = rj["params"] = ordered_json::object();
        for (const auto& [k, v] : row.params) pj[k] = v;
        rj["detector"] = {{"fn", row.det_fn}, {"fp", row.det_fp}};
        rj["tracker_only"] = eval_json(row.tracker_only);
        if (row.with_reid) {
            rj["reider"] = row.reider;
            rj["with_reid"] = eval_json(*row.with_reid);
        }
        rows.push_back(std::move(rj));
    }
    return j.dump(2) + "\n";
}

ReportDocument report_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const ordered_json::exception& ex) {
        throw Error(Errc::parse_error, std::string("report: ") + ex.what());
    }
    ReportDocument report;
    try {
        report.version = j.at("version").get<int>();
        if (j.contains("scenario")) {
            report.scenario = scenario_from_json(j["scenario"].dump());
        }
        for (const auto& [k, v] : j.at("config").items()) {
            report.config.emplace_back(k, v.get<std::string>());
        }
        for (const auto& rj : j.at("results")) {
            ResultRow row;
            row.tracker = rj.at("tracker").get<std::string>();
            for (const auto& [k, v] : rj.at("params").items()) {
                row.params.emplace_back(k, v.get<std::string>());
            }
            row.det_fn = rj.at("detector").at("fn").get<std::size_t>();
            row.det_fp = rj.at("detector").at("fp").get<std::size_t>();
            row.tracker_only = eval_from_json(rj.at("tracker_only"));
            if (rj.contains("with_reid")) {
                row.reider = rj.at("reider").get<std::string>();
                row.with_reid = eval_from_json(rj.at("with_reid"));
            }
            report.rows.push_back(std::move(row));
        }
    } catch (const ordered_json::exception& ex) {
        throw Error(Errc::parse_error, std::string("report: ") + ex.what());
    }
    return report;
}

void write_report(const ReportDocument& report, const std::string& path) {
    OutFile out(path);
    out.get() << report_to_json(report);
    out.close(path);
}

ReportDocument read_report(const std::string& path) {
    InFile in(path);
    std::ostringstream buf;
    buf << in.get().rdbuf();
    return report_from_json(buf.str());
}

std::string render_table(const ReportDocument& report) {
    const std::vector<std::string> header = {
        "DT", "Tracker", "Result", "ReIDer", "ReID Count", "Incorrect ID",
        "Result"};
    std::vector<std::vector<std::string>> cells;
    for (const auto& row : report.rows) {
        std::vector<std::string> c;
        c.push_back("FN " + std::to_string(row.det_fn) + " FP " +
                    std::to_string(row.det_fp));
        c.push_back(row.tracker);
        c.push_back(pct_text(row.tracker_only.correct_pct) + "%");
        if (row.with_reid) {
            c.push_back(row.reider);
            c.push_back(std::to_string(row.with_reid->reid_count));
            c.push_back(std::to_string(row.with_reid->incorrect_id));
            c.push_back(pct_text(row.with_reid->correct_pct) + "%");
        } else {
            c.insert(c.end(), {"-", "-", "-", "-"});
        }
        cells.push_back(std::move(c));
    }

    std::vector<std::size_t> width(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) {
        width[i] = header[i].size();
        for (const auto& row : cells) width[i] = std::max(width[i], row[i].size());
    }
    const auto emit_row = [&](const std::vector<std::string>& row) {
        std::string line = "|";
        for (std::size_t i = 0; i < row.size(); ++i) {
            line += " " + row[i];
            line.append(width[i] - row[i].size(), ' ');
            line += " |";
        }
        return line + "\n";
    };

    std::string out = emit_row(header);
    std::string rule = "|";
    for (const std::size_t w : width) {
        rule.append(w + 2, '-');
        rule += "|";
    }
    out += rule + "\n";
    for (const auto& row : cells) out += emit_row(row);
    return out;
}

} // namespace reidtrack
