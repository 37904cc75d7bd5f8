import pytest

from compiler.container import ContainerHeader, pack, read_container, sidecar_path, unpack, write_container
from compiler.insdel_compiler import compile, make_compiler_params
from models.data_models import BitString
from models.errors import ContainerFormatError


@pytest.fixture
def compiled(rng):
    params = make_compiler_params(64)
    word = compile(BitString.random(64, rng), params)
    return word, ContainerHeader.for_params(params, word.length)


def test_file_round_trip_with_sidecar(tmp_path, compiled):
    word, header = compiled
    path = str(tmp_path / "word.idlc")
    write_container(path, word, header, {"codec": "priv-insdel-v1"})
    assert (tmp_path / "word.idlc.json").exists()
    got, got_header, meta = read_container(path)
    assert got == word
    assert got_header == header
    assert meta == {"codec": "priv-insdel-v1"}


def test_missing_sidecar_reads_as_empty(tmp_path, compiled):
    word, header = compiled
    path = str(tmp_path / "bare.idlc")
    write_container(path, word, header)
    assert read_container(path)[2] == {}
    assert sidecar_path(path) == path + ".json"


def test_odd_bit_counts_survive_packing():
    word = BitString.from_str("1011001")
    header = ContainerHeader(K=7, q2=2, b=0, beta=0, idx_bits=0, nbits=7)
    assert unpack(pack(word, header)) == (word, header)


def test_header_must_match_word(compiled):
    word, header = compiled
    with pytest.raises(ContainerFormatError):
        pack(word[:-1], header)


@pytest.mark.parametrize("mutate", [
    lambda data: data[:10],
    lambda data: b"XXXX" + data[4:],
    lambda data: data[:4] + b"\x09" + data[5:],
    lambda data: data + b"\x00",
])
def test_malformed_containers_are_rejected(compiled, mutate):
    word, header = compiled
    with pytest.raises(ContainerFormatError):
        unpack(mutate(pack(word, header)))
