// Cuts a subdivided cube along a cross-shaped seam tree, flattens it and
// prints the metrics. With an output prefix, also writes <prefix>.obj and
// <prefix>.svg.

#include <cstdio>
#include <string>

#include "seamkit/seamkit.hpp"

int main(int argc, char** argv) {
    using namespace seamkit;

    const IndexedMesh cube = synthetic::cube(4);
    const auto [normalized, xf] = normalize(cube);
    const SeamSet seams = canonicalize(synthetic::to_canonical(synthetic::box_cross_seams(1, 1, 1), xf));

    const TokenSequence tokens = encode(seams);
    std::printf("%zu seam segments, %zu tokens\n", seams.size(), tokens.size());

    for (const auto& [name, s] : {std::pair{"cross", seams}, std::pair{"none", SeamSet{}},
                                  std::pair{"all edges", canonicalize(synthetic::to_canonical(
                                                             synthetic::box_all_edges(1, 1, 1), xf))}}) {
        const Evaluation ev = evaluate_full(cube, s);
        std::printf("%-10s fragments %zu  distortion %.6f  runtime %.4fs\n", name, ev.metrics.fragments,
                    ev.metrics.distortion, ev.metrics.runtime_s);
    }

    if (argc > 1) {
        const std::string prefix = argv[1];
        const Evaluation ev = evaluate_full(cube, seams);
        write_file_atomic(prefix + ".obj", atlas_to_obj(cube, ev.atlas));
        write_file_atomic(prefix + ".svg", atlas_to_svg(ev.atlas));
        std::printf("wrote %s.obj and %s.svg\n", prefix.c_str(), prefix.c_str());
    }
    return 0;
}
