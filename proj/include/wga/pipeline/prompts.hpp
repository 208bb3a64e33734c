#pragma once

#include <string>
#include <string_view>

namespace wga::prompts {

inline std::string replace_all(std::string text, std::string_view key, std::string_view value) {
    std::string needle = "{" + std::string(key) + "}";
    size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.replace(pos, needle.size(), value);
        pos += value.size();
    }
    return text;
}

// Research system prompt: declares the two tools and the tool-call wire
// format the agent must emit.
inline constexpr const char* kResearchSystem = R"(You are helping to build a high-quality visual generation dataset.
Your task is to gather information and reference images for creating detailed image descriptions.

Your Goal: Create a detailed recaption for "{image_prompt}"
about the IP "{ip_name}" ({country}).

Natural Workflow (think step by step):
1. First, search for background information about this IP/character to understand who they are, their characteristics, style, and context. This knowledge will help you craft more accurate image search queries.
2. Then, search for reference images of this IP/character. Good reference visuals are essential for the final detailed description.
3. Finally, I will provide you with the downloaded reference images, and you will generate a detailed <recaption> that references "image_1" and "image_2" specifically.

Tool Call Format (IMPORTANT - use ONLY this format):
<tool_call>
{"name": "tool_name", "arguments": {"param1": "value1"}}
</tool_call>
Examples:
- Text search: <tool_call>{"name": "text_search", "arguments": {"q": "search query", "hl": "zh", "top_k": 5}}</tool_call>
- Image search: <tool_call>{"name": "search_image", "arguments": {"q": "image query", "hl": "zh", "num": 8}}</tool_call>
)";

// Gap-detection instruction for the Think stage. The reply carries the
// reasoning in <think> and a JSON array of missing knowledge units in
// <response>; an empty array means generation can proceed directly.
inline constexpr const char* kThinkTemplate = R"(You are preparing to generate an image for the request below. Decide whether faithful generation requires external world knowledge that you cannot reliably supply from memory.

Request: "{image_prompt}"

Identify the visually critical attributes (identity, appearance, structure, scene-specific facts) that are missing, ambiguous, or unreliable. If the request is fully specified by common knowledge, the list is empty.

You MUST format your response using the following structure:
<think>
[Your reasoning about which attributes are missing and why]
</think>

<response>
["missing unit 1", "missing unit 2"]
</response>

The <response> block must contain ONLY a JSON array of strings (possibly empty).
)";

inline constexpr const char* kTextQueryTemplate = R"(Formulate one text_search tool call to gather background information for the request below.

Request: "{image_prompt}"
Missing knowledge: {missing_units}

Reply with exactly one <tool_call> block and nothing else.
)";

inline constexpr const char* kVisualQueryTemplate = R"(Formulate one search_image tool call to retrieve reference images for the request below, informed by the background evidence already gathered.

Request: "{image_prompt}"
Missing knowledge: {missing_units}
Background evidence:
{textual_evidence}

Reply with exactly one <tool_call> block and nothing else.
)";

// Reference-image quality rubric for the judge backend.
inline constexpr const char* kJudgeSystem = R"(You are an expert Image Quality Assessor for an AI training pipeline. Your task is to evaluate whether a downloaded image is a high-quality visual reference for a specific Intellectual Property (IP).

You must rate the image on a scale of 0 to 10 based on the following strict rubrics:

### 1. IP Consistency (Critical)
- Pass: The image clearly depicts the specific character/object requested.
- Fail (Score 0): The image shows a completely different character, a landscape, a real person (cosplay) if the IP is anime, or an unrelated object.

### 2. Layout & Composition
- Subject-Centric: The IP subject must be the main focus.
- Face Visibility: For characters, the face must be clearly visible (preferably front-facing or 3/4 view). REJECT if the face is tiny, distant, or back-facing.
- No Text-Heavy: REJECT images that are primarily movie posters with large text overlays, book covers, or infographics where the subject is obscured by text.
- No Collages: REJECT split-screens, manga panels, or multiple images stitched together. Single-scene images only.

### 3. Visual Quality
- Clarity: The image must be sharp. REJECT if it is severely blurry, pixelated, or has heavy jpeg compression artifacts.

### 4. Watermarks & Obstructions
- Reject: Large, obstructive watermarks covering the face or main body (e.g., full-screen stock photo watermarks).
- Accept: Small, unobtrusive logos in the corner are acceptable but lower the score slightly.

### Scoring Guide:
- 0: Wrong IP or completely unusable.
- 1-5 (Reject): Correct IP but violates a major rule (Blurry, Huge Watermark, Text-Heavy, Collage, Tiny Face).
- 6-7 (Borderline): Usable but not ideal (Side profile, small corner watermark, medium resolution).
- 8-10 (Excellent): Perfect reference (High-res, clear front-facing, no text, clean).
)";

inline constexpr const char* kJudgeQuestion = R"(Please evaluate the provided image for the IP: "{ip_name}".

Assess the image based on the system rubrics.
Return your response in JSON format ONLY with the following structure:
{
    "score": <int, 0-10>,
    "reason": "<string, a concise explanation of the score, mentioning any specific flaws like 'text-heavy', 'watermark', or 'blurry'>",
    "is_text_heavy": <bool>,
    "has_watermark": <bool>
}
)";

// Generated-image evaluation against two ground-truth references.
inline constexpr const char* kEvaluationPrompt = R"(You are an image evaluation assistant. Compare AS (assistant-generated image) against GT1 and GT2 (ground-truth images) given the Prompt.

Your task is to return exactly 6 fields: 5 integer scores (0-10) and 1 rationale string.

Evaluate these 5 dimensions independently:

1. "clarity": image sharpness, absence of blur/artifacts/noise, and richness of visible details.
2. "content_quality": faithfulness to the Prompt, subject completeness, and semantic coherence.
3. "aesthetics": visual appeal, composition, lighting/color harmony, and style consistency.
4. "text_relevance_ip": IP identity consistency. This means whether AS preserves the same character/object/IP identity as GT1/GT2 based on distinctive traits (e.g. face, hairstyle, costume, colors, species/object-defining features). Do NOT require exact matching of pose, background, camera angle, or composition.

Important instructions:
- Use GT1 and GT2 jointly to infer the stable identity and attributes of the IP.
- Do not penalize AS for differences that also vary between GT1 and GT2.
- Score each dimension independently before assigning the overall score.
- All five score fields must be integers from 0 to 10.
- "rationale" must be a single short string with at least two concrete evidence points, separated by semicolons.

You MUST respond with ONLY this exact JSON structure, with all 6 keys present and no extra keys:

{"clarity": 7, "content_quality": 8, "aesthetics": 7,
 "text_relevance_ip": 8,
 "rationale": "Evidence 1; Evidence 2"}

Do not use markdown fences.
Do not output any text before or after the JSON.
If uncertain, still output the best-effort JSON with all required keys.

Prompt: "{image_prompt}"
)";

// Evidence-grounded recaption instruction.
inline constexpr const char* kRecaptionPrompt = R"(You are a professional visual language reasoning assistant. Your task is to generate a reasoning process and a final detailed image description based on two reference images (image_1, image_2), the original instruction, and text search results.

Input Information
1. Reference Images: Explicitly labeled Reference Image 1 (refer to as image_1) and Reference Image 2 (refer to as image_2).
2. Original Instruction: The user's short request.
3. Background Info: Text information from previous search steps.

Output Format
Strictly follow XML format:
<think>
[Deep reasoning here:
 1. Analyze visual features of image_1 and image_2.
 2. Combine with background info to plan the fusion.
 3. Explicitly state what comes from image_1 and what comes from image_2.]
</think>
<recaption>
[The final detailed image description, including "Scene Description" and "Preservation Statement"]
</recaption>

Core Rules & Constraints
1. Reference Principle: You MUST strictly use "image_1" and "image_2" to refer to the images. DO NOT use vague terms like "the first image" or "reference picture".

2. Descriptive Style: The content of <Instruction> must be a description of the final result (Descriptive), NOT an editing command (Imperative).

3. Preservation Statement: At the end of the description, you MUST explicitly state what specifically is preserved from image_1 and image_2.

4. Language Consistency (MANDATORY): The content of <recaption> MUST be written entirely in the SAME language as the original instruction. If the original instruction is in Chinese, ALL descriptions in <recaption> must be in Chinese - NO English allowed. If the original instruction is in English, use English throughout. NEVER mix languages within the same description.

Original Instruction: "{image_prompt}"
Background Info:
{textual_evidence}

Start the task. Output <think> and <recaption>.
)";

// Structured prompt generation: emits <Image_Prompt>, <Tag_Name> and
// <Language> with the zh/en rule keyed on the IP's nationality.
inline constexpr const char* kPromptGeneration = R"(You are a specialized Image Generation Prompt Expert. Your mission is to generate a single, high-quality image generation prompt based on a specific IP (person/character). You must describe "Who is doing What in Which scene."

## 1. Core Logic & Language Rules (CRITICAL)

Step 1: Determine the IP's Nationality
* Case A: If the IP is Chinese (Mainland, Hong Kong, Taiwan, Macau):
    * Prompt Language: Must be Chinese.
    * Tag Language: Must be Chinese.
    * Language Code: `zh`
* Case B: If the IP is NOT Chinese (USA, UK, Japan, Korea, Europe, etc.):
    * Prompt Language: Must be English.
    * Tag Language: Must be English.
    * Language Code: `en`

## 2. Prompt Construction Requirements

1.  Content Elements:
    * Subject: The IP's name (and brief identity if needed for context).
    * Scene: A specific, realistic location fitting the IP's profession (e.g., Office, Studio, Stadium, Stage, Cafe, Street).
    * Action: A dynamic verb describing what they are doing (e.g., Interviewing, Singing, coding, running, drinking coffee).
2.  Realism Constraint:
    * The scene and action must align with the IP's public persona or profession.
    * Do not hallucinate impossible scenarios unless the IP is a fictional fantasy character.
3.  Syntactic Diversity (Avoid Repetition):
    * Do not always use the structure "Name is doing X in Y".

## 3. Output Format

You must output ONLY the XML tags below. Do not output markdown code blocks (like ```xml), explanations, or conversational filler.

<Image_Prompt>The full descriptive sentence</Image_Prompt>
<Tag_Name>Category of the action (e.g., Interview, Speech, Daily Life)</Tag_Name>
<Language>zh OR en</Language>

REMEMBER: Output ONLY the three XML tags above, nothing else.

Input: {ip_name} ({country})
Output:
)";

}  // namespace wga::prompts
