"""Reference JSON fixtures for the wire formats.

Seven canonical documents cover both task envelopes (request and response
for the human-initiated and the agent-initiated flows), the node status
report, the task assignment record, and the agent availability broadcast.

The human-task response text is cut off mid-sentence in the published
listing; the fixture completes the sentence and ``REPAIRED`` records where
the verbatim source ends, so compatibility checks can compare only up to
the published prefix.
"""

from __future__ import annotations

HUMAN_REQUEST = """\
{
    "jsonrpc": "2.0",
    "id": "12345",
    "method": "aios/delegateTask",
    "params": {
        "sender": {
            "id": "human_user"
        },
        "recipient": {
            "id": "academic_agent",
            "role": "assistant"
        },
        "messages": [
            {
                "role": "user",
                "content": {
                    "type": "text",
                    "text": "Summarize the key findings of this research paper."
                }
            }
        ],
        "maxTokens": 200
    }
}
"""

HUMAN_RESPONSE_TRUNCATION_POINT = (
    "The paper presents a novel approach to optimizing transformer models, achieving a 20"
)

HUMAN_RESPONSE = """\
{
    "jsonrpc": "2.0",
    "id": "12345",
    "result": {
        "sender": {
            "id": "academic_agent",
            "role": "assistant"
        },
        "recipient": {
            "id": "human_user"
        },
        "content": {
            "type": "text",
            "text": "The paper presents a novel approach to optimizing transformer models, achieving a 20% improvement."
        },
        "model": "GPT-4",
        "stopReason": "endTurn"
    }
}
"""

DELEGATION_REQUEST = """\
{
    "jsonrpc": "2.0",
    "id": "task-001",
    "method": "aios/delegateTask",
    "params": {
        "intent": "extract_data",
        "sender": {
            "id": "analysis_agent",
            "role": "processor"
        },
        "recipient": {
            "id": "data_agent",
            "role": "retriever"
        },
        "task": {
            "name": "Extract statistical features",
            "arguments": {
                "dataset": "financial_reports_2023.csv",
                "features": ["mean", "std", "sample_size"]
            }
        }
    }
}
"""

DELEGATION_RESPONSE = """\
{
    "jsonrpc": "2.0",
    "id": "task-001",
    "result": {
        "sender": {
            "id": "data_agent",
            "role": "retriever"
        },
        "recipient": {
            "id": "analysis_agent",
            "role": "processor"
        },
        "content": {
            "task": "Extract statistical features",
            "status": "completed",
            "output": {
                "mean": 85.3,
                "std": 4.2,
                "sample_size": 500
            }
        },
        "isError": false
    }
}
"""

NODE_STATUS_REPORT = """\
{
  "node_id": "Node_42",
  "node_name": "aios-compute-1",
  "timestamp": "2025-02-28T12:00:00Z",
  "system_info": {
    "cpu_percent": 23.4,
    "memory_percent": 67.2,
    "platform": "Linux"
  },
  "available_agents": [
    "example/academic_agent",
    "example/math_agent",
    "example/language_tutor"
  ]
}
"""

TASK_ASSIGNMENT = """\
{
  "task_id": "task-987",
  "assigned_agent": "example/language_tutor",
  "status": "running"
}
"""

AGENT_METADATA = """\
{
  "agent_id": "example/academic_agent",
  "description": ["text_analysis", "research"],
  "last_seen": "2025-02-28T12:00:00Z"
}
"""

# Fixtures whose text had to be completed relative to the published listing.
REPAIRED = {"human_response": HUMAN_RESPONSE_TRUNCATION_POINT}

_CORPUS: list[tuple[str, str]] = [
    ("human_request", HUMAN_REQUEST),
    ("human_response", HUMAN_RESPONSE),
    ("delegation_request", DELEGATION_REQUEST),
    ("delegation_response", DELEGATION_RESPONSE),
    ("node_status_report", NODE_STATUS_REPORT),
    ("task_assignment", TASK_ASSIGNMENT),
    ("agent_metadata", AGENT_METADATA),
]


def golden_corpus() -> list[tuple[str, bytes]]:
    """All reference documents as (name, UTF-8 bytes) pairs."""
    return [(name, text.encode("utf-8")) for name, text in _CORPUS]
