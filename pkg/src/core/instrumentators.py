import logging

from prometheus_client import Counter, Info, start_http_server

logger = logging.getLogger(__name__)

remote_requests_total = Counter(
    "turnwise_remote_requests_total",
    "Chat-completion requests issued to the inference endpoint",
    ["outcome"],
)
remote_retries_total = Counter(
    "turnwise_remote_retries_total",
    "Retried chat-completion requests",
)
judge_fallbacks_total = Counter(
    "turnwise_judge_fallbacks_total",
    "Judge scores replaced by the fallback value",
    ["game"],
)
harness_exceptions_total = Counter(
    "turnwise_exceptions_total",
    "Total number of unhandled exceptions",
    ["exception_type"],
)


mock_server_info = Info("turnwise_mock_server", "Mock inference server build information")


def start_metrics_exporter(port: int) -> None:
    start_http_server(port)
    logger.info(f"Prometheus exporter listening on :{port}")
