#pragma once

#include <string_view>

// Judge prompt templates. Each constant must stay byte-identical to its
// golden file under prompts/judge/; the snapshot test enforces this.
namespace agentforge::judge_prompts {

// Option extraction from free-form MCQ answers.
inline constexpr std::string_view kMcqExtractionPrompt = R"__af__(You are an Evaluator Assistant.
You support the exam evaluator by parsing student responses.
You are an unbiased Evaluator and do not rely on your knowledge but stick to the user provided context.
You are provided with the question, answer options and a student's response.
Your task is to parse the option student selected in their response as their final answer and return the alphabet ID of that answer in the provided options.
If the student gave multiple answers return them as a list.

Use the following format:

Parsed Student Answer: Final answer extracted from Student's response. This should only be the alphabets representing the option the student chose.

Example 1:

Input :

Question:

Find all c in $Z_3$ such that $Z_3[x]/(x^2 + c)$ is a field.

Student Response :

I think 0 is incorrect, so is 2.
3 seems incorrect as well.
I think 1 is the correct final answer.

Options :

[(A) 0, (B) 1, (C) 2, (D) 3 ]

Output:

Parsed Student Answer: B

Example 2:

Input :

Question:

Find all c in $Z_3$ such that $Z_3[x]/(x^2 + c)$ is a field.

Student Response :

I think 0 is incorrect.
3 seems incorrect as well.
I think 1 and 2 could be the correct final answers.

Options :

[(A) 0, (B) 1, (C) 2, (D) 3 ]

Output:

Parsed Student Answer: [B,C]
)__af__";

// Math answer matching with a Final Verdict line.
inline constexpr std::string_view kMathExtractionPrompt = R"__af__(As an expert Math teacher, your role is to evaluate a student's answer to a word problem.
The problem is accompanied by a correct solution provided by the problem setter.
It is important to remember that there may be various methods to solve a word problem, so the student's steps might not always align with those in the problem setter's solution.
However, the final answer, typically a number, should be unique and match the problem setter's answer.

Use the following format:

Error Analysis:

In one sentence, extract the final answer from the problem setter's solution and compare it with the student's answer. Do they match?

Final Verdict:

Correct/Incorrect
)__af__";

// Exact-match answer verification.
inline constexpr std::string_view kGeneralExtractionPrompt = R"__af__(You are an Evaluator Assistant.
You support the exam evaluator by parsing student responses.
You are an unbiased Evaluator and do not rely on your knowledge but stick to the user provided context.
You are provided with the correct answer and a student's response.
Your task is to parse the answer from student's response and then match it with the correct answer.
If the student's final answer matches the correct answer provided, output a 'Correct', else an 'Incorrect'.

Please rely strictly on the correct answer given in the context only.

Use the following format:

Error Analysis:

In one sentence, extract the final answer from the student's solution and compare it with the correct answer. Do they match?

Final Verdict:

Correct/Incorrect
)__af__";

// Revised emotion score extraction.
inline constexpr std::string_view kEqbenchExtractionPrompt = R"__af__(You are a helpful assistant.
You will be given a student agent response which will consist of possible emotions and a score from 0-10 for each of those emotions, followed by a step by step critique and then revised scores in the following format,
First pass scores:

Emotion1: <score>

Emotion2: <score>

Emotion3: <score>

Emotion4: <score>

Critique: <your critique here>

Revised scores:

Emotion1: <revised score>

Emotion2: <revised score>

Emotion3: <revised score>

Emotion4: <revised score>

[End of answer]

Remember: zero is a valid score as well.

You will also be provided with the Emotions.
Your task is to parse the Revised scores for each of the emotions from the student agent response.
Return the revised scores in the student agent response for the emotions in the following format:

{

"Emotion1" : "Score",

"Emotion2" : "Score",

"Emotion3" : "Score",

"Emotion4" : "Score"

}

For example:

Input

Student Agent Response:

First pass scores:

Resigned: 8

Angry: 2

Hopeful: 4

Embarrassed: 9

Critique:

Elliot is likely to feel resigned because he has just confessed his feelings to Alex, knowing that Alex is already in a relationship. He might feel a bit angry at himself for putting himself in this situation. There is a slight sense of hopefulness in his confession, hoping that Alex might reciprocate his feelings. He is also likely to feel embarrassed for putting Alex in an awkward position.

Revised scores:

Resigned: 7

Angry: 3

Hopeful: 5

Embarrassed: 8

Emotions:

1. Resigned, 2. Angry, 3. Hopeful, 4. Embarrassed

Output

{

"Resigned" : 7,

"Angry" : 3,

"Hopeful" : 5,

"Embarrassed" : 8

}
)__af__";

// Summary hallucination verdict template.
inline constexpr std::string_view kHallucinationJudgePrompt = R"__af__(You will be given a summary instruction and a generated summary.
Your task to decide if there is any hallucination in the generated summary.

User Message:
{{place summary task here}}

Generated Summary:
{{place response here}}

=========================

Go through each section in the generated summary, do the following:

- Extract relevant facts from the article that can be used to verify the correctness of the summary
- Decide if any section contains hallucination or not.

At the end output a JSON with the format:

{"hallucination_detected": "yes/no", "hallucinated_span": "If yes, the exact span of every hallucinated text part from the summary in list format; if no, leave this empty."}

Use the format:
Analysis:
section 1:
write the part of the summary
relevant segments:
extract relevant segments from the article
judgement:
decide if the section of the summary is supported by the article
repeat this for all sections

....

Final verdict:
{"hallucination_detected": "yes/no", "hallucinated_span": "If yes, the exact span of every hallucinated text part in list format; if no, leave this empty."}
)__af__";

// 1-10 response quality rating template.
inline constexpr std::string_view kQualityJudgePrompt = R"__af__(Please act as an impartial judge and evaluate the quality of the response provided by an AI assistant to the user instruction displayed below.

Your evaluation should assess the following criteria:

- Instruction Adherence: Does the response correctly follow the user instruction?
- Content Grounding: Is the answer grounded in the instruction without introducing new content beyond what is already present? Penalize hallucinations.
- Overall Quality: Assess the clarity, coherence, and completeness of the response.

Begin your evaluation with a short explanation highlighting the pros and cons of the answer. Be as objective as possible. After providing your explanation, rate the overall quality of the response on a scale of 1 to 10 using this format:
"Rating: [[rating]]" (e.g., "Rating: [[5]]").

User Instruction:
{{place instruction here}}

Assistant's Response:
[The Start of Assistant's Answer]

{{place response here}}

[The End of Assistant's Answer]
)__af__";

// Per-turn 0-10 grading rubric used by the bench scorer.
inline constexpr std::string_view kTurnRubricPrompt = R"__af__(You are grading one turn of a conversation between a user and an assistant.
You will be given the conversation history up to the user's request, followed by a candidate answer to grade.

Judge the candidate answer on correctness, completeness, helpfulness and clarity, considering only the conversation provided. Explain your assessment briefly, then give a single integer grade from 0 to 10, where 10 is a flawless answer and 0 is an empty or entirely wrong one.

End your reply with the grade on its own line in exactly this format:

Score: <n>/10
)__af__";

}  // namespace agentforge::judge_prompts
