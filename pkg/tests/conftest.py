"""Shared corpora and fixtures."""

from __future__ import annotations

import pytest

from molfp import from_smiles
from molfp.corpus import synthetic_smiles

# Hand-picked real molecules; everything here must pass the documented
# valence model (kekule forms where the model demands them).
CURATED = [
    "CC(=O)Oc1ccccc1C(=O)O",        # aspirin
    "CC(=O)Nc1ccc(O)cc1",           # paracetamol
    "CC(C)Cc1ccc(cc1)C(C)C(=O)O",   # ibuprofen
    "CN1C=NC2=C1C(=O)N(C)C(=O)N2C",  # caffeine, kekule form
    "CN1CCCC1c1cccnc1",             # nicotine
    "OC(=O)c1ccccc1",               # benzoic acid
    "Oc1ccccc1",                    # phenol
    "Cc1ccccc1",                    # toluene
    "c1ccc2ccccc2c1",               # naphthalene
    "c1ccncc1",                     # pyridine
    "c1cc[nH]c1",                   # pyrrole
    "c1ccoc1",                      # furan
    "c1ccsc1",                      # thiophene
    "O=[N+]([O-])c1ccccc1",         # nitrobenzene
    "NC(CO)C(=O)O",                 # serine
    "OC1CCCCC1",                    # cyclohexanol
    "C=Cc1ccccc1",                  # styrene
    "CC#N",                         # acetonitrile
    "CS(=O)C",                      # dmso
    "OCC(O)C(O)C(O)C(O)C=O",        # open-chain glucose
]


def corpus_200() -> list[str]:
    return CURATED + synthetic_smiles(200 - len(CURATED), seed=7)


@pytest.fixture(scope="session")
def corpus200() -> list[str]:
    return corpus_200()


@pytest.fixture(scope="session")
def mols200(corpus200):
    return [from_smiles(s) for s in corpus200]


@pytest.fixture(scope="session")
def corpus1000() -> list[str]:
    return synthetic_smiles(1000, seed=11)


@pytest.fixture(scope="session")
def corpus10k() -> list[str]:
    return synthetic_smiles(10_000, seed=13)
