pub const VERBS: &[&str] = &[
    "approve",
    "archive",
    "assess",
    "assign",
    "book",
    "calculate",
    "cancel",
    "check",
    "close",
    "collect",
    "confirm",
    "create",
    "decide",
    "deliver",
    "dispatch",
    "draft",
    "escalate",
    "evaluate",
    "examine",
    "file",
    "forward",
    "handle",
    "inspect",
    "invoice",
    "issue",
    "label",
    "load",
    "notify",
    "open",
    "pack",
    "pay",
    "plan",
    "prepare",
    "print",
    "process",
    "receive",
    "record",
    "register",
    "reject",
    "release",
    "repair",
    "request",
    "review",
    "schedule",
    "send",
    "ship",
    "sign",
    "submit",
    "test",
    "update",
    "validate",
    "verify",
    "weigh",
    "wrap",
];

pub const NOUNS: &[&str] = &[
    "account",
    "address",
    "application",
    "appointment",
    "batch",
    "bill",
    "booking",
    "claim",
    "complaint",
    "contract",
    "customer",
    "delivery",
    "document",
    "estimate",
    "form",
    "goods",
    "incident",
    "invoice",
    "item",
    "letter",
    "loan",
    "offer",
    "order",
    "package",
    "parcel",
    "part",
    "payment",
    "permit",
    "policy",
    "quote",
    "receipt",
    "refund",
    "report",
    "request",
    "return",
    "sample",
    "shipment",
    "stock",
    "supplier",
    "ticket",
    "vehicle",
    "voucher",
];

pub const LOREM: &[&str] = &[
    "lorem",
    "ipsum",
    "dolor",
    "sit",
    "amet",
    "consectetur",
    "adipiscing",
    "elit",
    "sed",
    "do",
    "eiusmod",
    "tempor",
    "incididunt",
    "ut",
    "labore",
    "et",
    "dolore",
    "magna",
    "aliqua",
    "enim",
    "ad",
    "minim",
    "veniam",
    "quis",
    "nostrud",
    "exercitation",
    "ullamco",
    "laboris",
    "nisi",
    "aliquip",
    "ex",
    "ea",
    "commodo",
    "consequat",
    "duis",
    "aute",
    "irure",
    "in",
    "reprehenderit",
    "voluptate",
    "velit",
    "esse",
    "cillum",
    "fugiat",
    "nulla",
    "pariatur",
    "excepteur",
    "sint",
    "occaecat",
    "cupidatat",
    "non",
    "proident",
    "sunt",
    "culpa",
    "qui",
    "officia",
    "deserunt",
    "mollit",
    "anim",
    "id",
];

pub const CATEGORIES: &[&[&str]] = &[
    &["gold", "silver", "bronze"],
    &["North", "South", "East", "West"],
    &["low", "medium", "high"],
    &["A", "B", "C", "D", "E"],
    &["online", "store"],
    &["Standard", "Express", "Priority", "Economy"],
    &["yes", "no"],
];

pub const CONSTANTS: &[&str] = &["n/a", "default", "ACME Corp", "EUR", "v1", "NL"];

pub const CASE_PREFIXES: &[&str] = &["Case", "C-", "ORD", "case_", "REQ-"];
