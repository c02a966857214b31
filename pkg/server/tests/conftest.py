import json
import socket

import pytest

from lm_server.model import CausalLMBackend, ServerConfig, materialize_demo_model
from lm_server.server import DistributionServer


@pytest.fixture(scope="session")
def demo_model_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("model") / "tiny"
    materialize_demo_model(str(path), seed=0)
    return str(path)


@pytest.fixture(scope="session")
def backend(demo_model_dir):
    return CausalLMBackend(ServerConfig(model_path=demo_model_dir))


@pytest.fixture(scope="session")
def server(demo_model_dir, backend):
    config = ServerConfig(model_path=demo_model_dir, top_n_cap=96)
    with DistributionServer(config, backend=backend) as srv:
        yield srv


class RawClient:
    """Minimal line client used to validate the wire format itself."""

    def __init__(self, address: str):
        host, _, port = address.rpartition(":")
        self.sock = socket.create_connection((host, int(port)), timeout=30)
        self.file = self.sock.makefile("rwb")

    def send_raw(self, data: bytes) -> bytes:
        self.file.write(data + b"\n")
        self.file.flush()
        return self.file.readline()

    def request(self, ctx, top_n) -> bytes:
        return self.send_raw(
            json.dumps({"v": 1, "ctx": list(ctx), "top_n": top_n}).encode()
        )

    def close(self):
        self.file.close()
        self.sock.close()


@pytest.fixture()
def client(server):
    c = RawClient(server.address)
    yield c
    c.close()
