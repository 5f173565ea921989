"""Pipeline counters using the Prometheus client."""

from __future__ import annotations

import threading
from pathlib import Path

from prometheus_client import CollectorRegistry, Counter, Histogram, write_to_textfile

# Cluster sizes span a handful of noise points to a few thousand returns
CLUSTER_SIZE_BUCKETS = (5.0, 10.0, 25.0, 50.0, 100.0, 250.0, 500.0, 1000.0, 2500.0, 5000.0)


class _MetricsCollectorSingleton:
    """Singleton holder for the metrics collector."""

    _instance: MetricsCollector | None = None

    @classmethod
    def get_instance(cls) -> MetricsCollector:
        """Get or create the singleton metrics collector instance."""
        if cls._instance is None:
            cls._instance = MetricsCollector()
        return cls._instance

    @classmethod
    def set_instance(cls, instance: MetricsCollector) -> None:
        """Set the singleton metrics collector instance."""
        cls._instance = instance


class MetricsCollector:
    """Prometheus-based collector with namespaced metric names."""

    def __init__(
        self, registry: CollectorRegistry | None = None, namespace: str = "osd"
    ) -> None:
        """Initialize metrics collector.

        Args:
            registry: Prometheus registry to use, defaults to a private registry
            namespace: Prefix for every metric name
        """
        self.registry = registry or CollectorRegistry()
        self.namespace = namespace
        self._counters: dict[str, Counter] = {}
        self._histograms: dict[str, Histogram] = {}
        self._lock = threading.Lock()

    def _get_metric_name(self, name: str) -> str:
        """Get fully qualified metric name with namespace.

        Args:
            name: Base metric name

        Returns:
            Namespaced metric name
        """
        if name.startswith(f"{self.namespace}_"):
            return name
        return f"{self.namespace}_{name}"

    def increment_counter(
        self,
        name: str,
        labels: dict[str, str] | None = None,
        value: float = 1.0,
    ) -> None:
        """Increment a counter metric.

        Args:
            name: Counter name (will be prefixed with the namespace)
            labels: Label key-value pairs
            value: Value to increment by (default 1.0)
        """
        labels = labels or {}
        qualified_name = self._get_metric_name(name)

        with self._lock:
            if qualified_name not in self._counters:
                self._counters[qualified_name] = Counter(
                    qualified_name,
                    f"Counter metric: {name}",
                    sorted(labels),
                    registry=self.registry,
                )
            counter = self._counters[qualified_name]

        if labels:
            counter.labels(**labels).inc(value)
        else:
            counter.inc(value)

    def record_histogram(
        self, name: str, value: float, labels: dict[str, str] | None = None
    ) -> None:
        """Record a histogram observation.

        Args:
            name: Histogram name (will be prefixed with the namespace)
            value: Value to observe
            labels: Label key-value pairs
        """
        labels = labels or {}
        qualified_name = self._get_metric_name(name)

        with self._lock:
            if qualified_name not in self._histograms:
                self._histograms[qualified_name] = Histogram(
                    qualified_name,
                    f"Histogram metric: {name}",
                    sorted(labels),
                    registry=self.registry,
                    buckets=CLUSTER_SIZE_BUCKETS,
                )
            histogram = self._histograms[qualified_name]

        if labels:
            histogram.labels(**labels).observe(value)
        else:
            histogram.observe(value)

    def get_counter_value(self, name: str, labels: dict[str, str] | None = None) -> float:
        """Get counter value using the Prometheus collection API.

        Args:
            name: Counter name (without namespace prefix)
            labels: Label key-value pairs

        Returns:
            Counter value, 0.0 when never incremented
        """
        labels = labels or {}
        qualified_name = self._get_metric_name(name)

        if qualified_name not in self._counters:
            return 0.0
        for metric_family in self._counters[qualified_name].collect():
            for sample in metric_family.samples:
                if sample.name.endswith("_total") and sample.labels == labels:
                    return float(sample.value)
        return 0.0

    def write_textfile(self, path: Path) -> None:
        """Write the registry in the Prometheus text exposition format."""
        write_to_textfile(str(path), self.registry)


def configure_metrics(namespace: str = "osd") -> MetricsCollector:
    """Install a fresh collector for one command run.

    Args:
        namespace: Prefix for every metric name

    Returns:
        The newly installed collector
    """
    collector = MetricsCollector(namespace=namespace)
    _MetricsCollectorSingleton.set_instance(collector)
    return collector


def get_metrics_collector() -> MetricsCollector:
    """Get the global metrics collector instance.

    Returns:
        Metrics collector instance
    """
    return _MetricsCollectorSingleton.get_instance()
