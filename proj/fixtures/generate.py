"""Regenerates the bundled mini dataset.

Four communities, each with 3 drugs, 2 diseases, 7 genes and 1 anatomy.
Drugs treat diseases of their own community; gene-gene edges are dense
inside a community and sparse across. Features are a community centroid plus
noise. Two prediction targets link to genes of communities 0 and 2, and one
disease has no gene links at all (proximity is not computable for it).

    python3 fixtures/generate.py fixtures/
"""

import random
import sys
from pathlib import Path

SEED = 20201
DIM = 16
COMMUNITIES = 4

TREATS = "Hetionet::CtD::Compound:Disease"
PALLIATES = "Hetionet::CpD::Compound:Disease"
BINDS = "Hetionet::CbG::Compound:Gene"
ASSOC = "Hetionet::DaG::Disease:Gene"
PPI = "STRING::OTHER::Gene:Gene"
EXPR = "Hetionet::AeG::Anatomy:Gene"
RESEMBLES = "Hetionet::DrD::Disease:Disease"
VIRAL = "bioarx::VirGenHumGen::Disease:Gene"


def main(out: Path) -> None:
    rng = random.Random(SEED)
    drugs, diseases, genes, anat = [], [], [], []
    for c in range(COMMUNITIES):
        drugs.append([f"Compound::DB{c}{i:02d}" for i in range(3)])
        diseases.append([f"Disease::MESH:D{c}{i:02d}" for i in range(2)])
        genes.append([f"Gene::{1000 + 10 * c + i}" for i in range(7)])
        anat.append(f"Anatomy::UBERON:000{c}")

    edges = []
    for c in range(COMMUNITIES):
        g = genes[c]
        # ring plus chords inside the community
        for i in range(len(g)):
            edges.append((g[i], PPI, g[(i + 1) % len(g)]))
        for _ in range(3):
            a, b = rng.sample(g, 2)
            edges.append((a, PPI, b))
        for d in drugs[c]:
            for t in rng.sample(g, 2):
                edges.append((d, BINDS, t))
        for s in diseases[c]:
            for t in rng.sample(g, 3):
                edges.append((s, ASSOC, t))
        for t in rng.sample(g, 3):
            edges.append((anat[c], EXPR, t))
        # every drug treats one disease of its community, some treat both
        for i, d in enumerate(drugs[c]):
            edges.append((d, TREATS, diseases[c][i % 2]))
            if rng.random() < 0.4:
                edges.append((d, PALLIATES, diseases[c][(i + 1) % 2]))
        edges.append((diseases[c][0], RESEMBLES, diseases[c][1]))
    # sparse bridges between neighbouring communities
    for c in range(COMMUNITIES):
        edges.append((genes[c][0], PPI, genes[(c + 1) % COMMUNITIES][3]))
    orphan = "Disease::MESH:D999999"
    edges.append((drugs[1][0], TREATS, orphan))

    with open(out / "edges.tsv", "w") as f:
        f.write("# head\trelation\ttail\n")
        for h, r, t in edges:
            f.write(f"{h}\t{r}\t{t}\n")

    covid = []
    for name, c in (("Disease::SARS-CoV2 E", 0), ("Disease::SARS-CoV2 M", 2)):
        for t in rng.sample(genes[c], 3):
            covid.append((name, VIRAL, t))
    with open(out / "covid.tsv", "w") as f:
        for h, r, t in covid:
            f.write(f"{h}\t{r}\t{t}\n")

    centroids = [[rng.gauss(0, 1) for _ in range(DIM)] for _ in range(COMMUNITIES)]
    with open(out / "features.txt", "w") as f:
        for c in range(COMMUNITIES):
            for name in drugs[c] + diseases[c] + genes[c] + [anat[c]]:
                row = [centroids[c][k] + 0.3 * rng.gauss(0, 1) for k in range(DIM)]
                f.write(name + "\t" + " ".join(f"{v:.6f}" for v in row) + "\n")
        # the orphan disease and the prediction targets fall back to seeded vectors

    with open(out / "train.cfg", "w") as f:
        f.write("# small model for the bundled dataset\n")
        f.write("hidden_dim = 16\nembed_dim = 16\nepochs = 20\nlearning_rate = 0.5\n")


if __name__ == "__main__":
    main(Path(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).parent))
