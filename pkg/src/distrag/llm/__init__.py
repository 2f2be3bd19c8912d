from distrag.llm.clients import (
    REFUSAL,
    Completion,
    HttpClient,
    RecordingClient,
    ReplayClient,
    ScriptedSparqlAuthor,
    complete,
    prompt_sha256,
)
from distrag.llm.prompts import (
    PromptTemplate,
    QueryTemplateHint,
    TemplateId,
    load_template,
    render_prompt,
    render_sparql_prompt,
)

__all__ = [
    "REFUSAL", "Completion", "HttpClient", "RecordingClient", "ReplayClient",
    "ScriptedSparqlAuthor", "complete", "prompt_sha256", "PromptTemplate",
    "QueryTemplateHint", "TemplateId", "load_template", "render_prompt", "render_sparql_prompt",
]
